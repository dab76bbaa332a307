//! Bi-filtered, Maslov-graded chain complexes over `Z2[U, U^-1]`.
//!
//! A complex is stored by its basis: every generator `x` carries an
//! Alexander grading `A(x)`, a rational Maslov grading `M(x)` and an
//! optional spin^c label. An arrow `x -> y` with exponent `m` means that
//! `∂x` contains `U^m y`. The term `U^k x` sits at `(A(x) - k, -k)` in the
//! `(A, j)` plane and has grading `M(x) - 2k`.

mod elim;
mod homology;
mod iso;
mod local;
pub mod random;
mod thin;

pub use elim::{collapsed_rank, eliminate, eliminate_by, is_acyclic, laurent_rank};
pub use homology::{
    correction_term, coset_oracle, generator_coset, surgery_d, tower_class, v_invariant, v_oracle,
    ChainElement, GeneratorCoset, GradingSlice, ORACLE_CAP,
};
pub use iso::{find_iso, IsoWitness, LabeledGraph};
pub use local::{local_equiv_search, LocalEquiv};
pub use thin::{hat_ranks, is_thin, thin_model, thin_model_with};

use crate::rational::{self, q, Q};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),
    #[error("not knot-type: homology has rank {rank}")]
    NotKnotType { rank: usize },
    #[error("search space of {size} exceeds cap {cap}")]
    CapExceeded { size: String, cap: u64 },
    #[error("complex is not thin")]
    NotThin,
    #[error("invalid complex: {0}")]
    Invalid(String),
    #[error("cannot parse complex: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub alexander: i64,
    pub maslov: Q,
    pub spinc: Option<i64>,
}

impl Generator {
    pub fn new(name: impl Into<String>, alexander: i64, maslov: Q) -> Self {
        Generator {
            name: name.into(),
            alexander,
            maslov,
            spinc: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arrow {
    pub from: usize,
    pub to: usize,
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnotComplex {
    gens: Vec<Generator>,
    arrows: Vec<Arrow>,
    tower: Option<Q>,
}

/// A failed invariant, naming the offending generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateArrow { from: String, to: String, m: u32 },
    Maslov { from: String, to: String, m: u32 },
    Filtration { from: String, to: String, m: u32 },
    BoundarySquared { from: String, to: String, exp: u32 },
    MixedSpinc { a: String, b: String },
    TowerRank { grading: Q, rank: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DuplicateArrow { from, to, m } => {
                write!(f, "duplicate arrow {from} -> U^{m} {to}")
            }
            Violation::Maslov { from, to, m } => {
                write!(f, "Maslov law fails on {from} -> U^{m} {to}")
            }
            Violation::Filtration { from, to, m } => {
                write!(f, "filtration law fails on {from} -> U^{m} {to}")
            }
            Violation::BoundarySquared { from, to, exp } => {
                write!(f, "∂² has odd coefficient of U^{exp} {to} in ∂²{from}")
            }
            Violation::MixedSpinc { a, b } => write!(f, "spin^c labels differ on {a} and {b}"),
            Violation::TowerRank { grading, rank } => {
                write!(f, "tower at grading {grading} has homology rank {rank}")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GenJson {
    name: String,
    #[serde(rename = "A")]
    a: i64,
    #[serde(rename = "M", with = "rational::as_string")]
    m: Q,
    #[serde(default)]
    spinc: Option<i64>,
}

#[derive(Serialize, Deserialize)]
struct ArrowJson {
    from: String,
    to: String,
    m: u32,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    generators: Vec<GenJson>,
    arrows: Vec<ArrowJson>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "rational::opt_string"
    )]
    tower: Option<Q>,
}

impl KnotComplex {
    /// Builds a complex from generators and `(from, to, m)` index triples.
    /// Only structural checks happen here; see [`KnotComplex::validate`].
    pub fn new(
        gens: Vec<Generator>,
        arrows: impl IntoIterator<Item = (usize, usize, u32)>,
    ) -> Result<Self, ComplexError> {
        let mut seen = BTreeSet::new();
        for g in &gens {
            if !seen.insert(g.name.as_str()) {
                return Err(ComplexError::DuplicateName(g.name.clone()));
            }
        }
        let mut arr = Vec::new();
        for (from, to, m) in arrows {
            if from >= gens.len() || to >= gens.len() {
                return Err(ComplexError::UnknownGenerator(format!("#{}", from.max(to))));
            }
            arr.push(Arrow { from, to, m });
        }
        Ok(KnotComplex {
            gens,
            arrows: arr,
            tower: None,
        })
    }

    /// Same as [`KnotComplex::new`] but arrows are given by name.
    pub fn from_named(
        gens: Vec<Generator>,
        arrows: &[(&str, &str, u32)],
    ) -> Result<Self, ComplexError> {
        let idx: HashMap<&str, usize> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| (g.name.as_str(), i))
            .collect();
        let mut arr = Vec::new();
        for (f, t, m) in arrows {
            let fi = *idx
                .get(f)
                .ok_or_else(|| ComplexError::UnknownGenerator(f.to_string()))?;
            let ti = *idx
                .get(t)
                .ok_or_else(|| ComplexError::UnknownGenerator(t.to_string()))?;
            arr.push((fi, ti, *m));
        }
        KnotComplex::new(gens, arr)
    }

    /// Pairs arrows mod 2: duplicated `(from, to, m)` triples cancel.
    pub fn normalized(mut self) -> Self {
        let mut count: BTreeMap<Arrow, u32> = BTreeMap::new();
        for a in &self.arrows {
            *count.entry(*a).or_default() += 1;
        }
        self.arrows = count
            .into_iter()
            .filter(|(_, c)| c % 2 == 1)
            .map(|(a, _)| a)
            .collect();
        self
    }

    pub fn with_tower(mut self, d: Option<Q>) -> Self {
        self.tower = d;
        self
    }

    pub fn with_spinc(mut self, s: Option<i64>) -> Self {
        for g in &mut self.gens {
            g.spinc = s;
        }
        self
    }

    pub fn unknot() -> Self {
        KnotComplex::new(vec![Generator::new("z", 0, q(0))], []).expect("unknot")
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    /// Grading of the selected homology tower, when one was chosen
    /// explicitly (complexes whose homology has one tower per parity).
    pub fn tower(&self) -> Option<Q> {
        self.tower
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// Spin^c label shared by the generators, if any.
    pub fn spinc(&self) -> Option<i64> {
        self.gens.first().and_then(|g| g.spinc)
    }

    pub fn out_lists(&self) -> Vec<Vec<(usize, u32)>> {
        let mut out = vec![Vec::new(); self.gens.len()];
        for a in &self.arrows {
            out[a.from].push((a.to, a.m));
        }
        out
    }

    /// Moves every Maslov grading by `dm` and every Alexander grading by `da`.
    pub fn shifted(&self, da: i64, dm: Q) -> Self {
        let mut k = self.clone();
        for g in &mut k.gens {
            g.alexander += da;
            g.maslov += dm;
        }
        k.tower = k.tower.map(|t| t + dm);
        k
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let name = |i: usize| self.gens[i].name.clone();
        let mut seen = BTreeSet::new();
        for a in &self.arrows {
            if !seen.insert(*a) {
                out.push(Violation::DuplicateArrow {
                    from: name(a.from),
                    to: name(a.to),
                    m: a.m,
                });
            }
            let (x, y) = (&self.gens[a.from], &self.gens[a.to]);
            if y.maslov - q(2 * a.m as i64) != x.maslov - q(1) {
                out.push(Violation::Maslov {
                    from: name(a.from),
                    to: name(a.to),
                    m: a.m,
                });
            }
            if y.alexander - a.m as i64 > x.alexander {
                out.push(Violation::Filtration {
                    from: name(a.from),
                    to: name(a.to),
                    m: a.m,
                });
            }
        }
        let outs = self.out_lists();
        for (x, list) in outs.iter().enumerate() {
            let mut acc: BTreeMap<(usize, u32), u32> = BTreeMap::new();
            for &(y, m1) in list {
                for &(z, m2) in &outs[y] {
                    *acc.entry((z, m1 + m2)).or_default() += 1;
                }
            }
            for ((z, exp), c) in acc {
                if c % 2 == 1 {
                    out.push(Violation::BoundarySquared {
                        from: name(x),
                        to: name(z),
                        exp,
                    });
                }
            }
        }
        if let Some(first) = self.gens.first() {
            if let Some(g) = self.gens.iter().find(|g| g.spinc != first.spinc) {
                out.push(Violation::MixedSpinc {
                    a: first.name.clone(),
                    b: g.name.clone(),
                });
            }
        }
        if out.is_empty() {
            if let Some(t) = self.tower {
                let rank = GradingSlice::new(self, t).homology_rank();
                if rank != 1 {
                    out.push(Violation::TowerRank { grading: t, rank });
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let js = ComplexJson {
            generators: self
                .gens
                .iter()
                .map(|g| GenJson {
                    name: g.name.clone(),
                    a: g.alexander,
                    m: g.maslov,
                    spinc: g.spinc,
                })
                .collect(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowJson {
                    from: self.gens[a.from].name.clone(),
                    to: self.gens[a.to].name.clone(),
                    m: a.m,
                })
                .collect(),
            tower: self.tower,
        };
        serde_json::to_string_pretty(&js).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, ComplexError> {
        let js: ComplexJson =
            serde_json::from_str(s).map_err(|e| ComplexError::Parse(e.to_string()))?;
        let gens: Vec<Generator> = js
            .generators
            .into_iter()
            .map(|g| Generator {
                name: g.name,
                alexander: g.a,
                maslov: g.m,
                spinc: g.spinc,
            })
            .collect();
        let arrows: Vec<(&str, &str, u32)> = js
            .arrows
            .iter()
            .map(|a| (a.from.as_str(), a.to.as_str(), a.m))
            .collect();
        Ok(KnotComplex::from_named(gens, &arrows)?.with_tower(js.tower))
    }

    /// Tensor product with the Leibniz differential. Names become `a|b`,
    /// spin^c labels add.
    pub fn tensor(&self, other: &KnotComplex) -> Result<KnotComplex, ComplexError> {
        let n2 = other.len();
        let mut gens = Vec::with_capacity(self.len() * n2);
        for a in &self.gens {
            for b in &other.gens {
                gens.push(Generator {
                    name: format!("{}|{}", a.name, b.name),
                    alexander: a.alexander + b.alexander,
                    maslov: a.maslov + b.maslov,
                    spinc: match (a.spinc, b.spinc) {
                        (Some(x), Some(y)) => Some(x + y),
                        (x, y) => x.or(y),
                    },
                });
            }
        }
        let mut arrows = Vec::new();
        for ar in &self.arrows {
            for j in 0..n2 {
                arrows.push((ar.from * n2 + j, ar.to * n2 + j, ar.m));
            }
        }
        for ar in &other.arrows {
            for i in 0..self.len() {
                arrows.push((i * n2 + ar.from, i * n2 + ar.to, ar.m));
            }
        }
        let tower = match (self.tower, other.tower) {
            (Some(a), Some(b)) => Some(a + b),
            (Some(a), None) => Some(a + correction_term(other)?),
            (None, Some(b)) => Some(correction_term(self)? + b),
            (None, None) => None,
        };
        Ok(KnotComplex::new(gens, arrows)?.with_tower(tower))
    }

    /// Dual complex: gradings negated, arrows reversed, labels conjugated.
    pub fn dual(&self) -> KnotComplex {
        KnotComplex {
            gens: self
                .gens
                .iter()
                .map(|g| Generator {
                    name: format!("{}*", g.name),
                    alexander: -g.alexander,
                    maslov: -g.maslov,
                    spinc: g.spinc.map(|s| -s),
                })
                .collect(),
            arrows: self
                .arrows
                .iter()
                .map(|a| Arrow {
                    from: a.to,
                    to: a.from,
                    m: a.m,
                })
                .collect(),
            tower: self.tower.map(|t| -t),
        }
    }

    /// Disjoint union. Clashing names from `other` get primes appended.
    pub fn direct_sum(&self, other: &KnotComplex) -> KnotComplex {
        let mut names: BTreeSet<String> = self.gens.iter().map(|g| g.name.clone()).collect();
        let mut gens = self.gens.clone();
        for g in &other.gens {
            let mut n = g.name.clone();
            while names.contains(&n) {
                n.push('\'');
            }
            names.insert(n.clone());
            gens.push(Generator {
                name: n,
                ..g.clone()
            });
        }
        let off = self.len();
        let mut arrows = self.arrows.clone();
        arrows.extend(other.arrows.iter().map(|a| Arrow {
            from: a.from + off,
            to: a.to + off,
            m: a.m,
        }));
        KnotComplex {
            gens,
            arrows,
            tower: self.tower.or(other.tower),
        }
    }

    /// Drops every arrow that lowers the Alexander filtration, leaving the
    /// associated graded complex.
    pub fn associated_graded(&self) -> KnotComplex {
        let mut k = self.clone();
        k.arrows
            .retain(|a| self.gens[a.to].alexander - a.m as i64 == self.gens[a.from].alexander);
        k.tower = None;
        k
    }

    /// Arrow graph with grading labels, for isomorphism checks.
    pub fn labeled_graph(&self) -> LabeledGraph {
        LabeledGraph {
            grades: self
                .gens
                .iter()
                .map(|g| (q(g.alexander), g.maslov))
                .collect(),
            edges: self
                .arrows
                .iter()
                .map(|a| (a.from, a.to, a.m as u64))
                .collect(),
        }
    }
}

/// The acyclic square `a -> b`, `a -> U c`, `b -> U d`, `c -> d` with `a`
/// at Alexander grading `alex` and Maslov grading `m`.
pub fn acyclic_box(prefix: &str, alex: i64, m: Q, spinc: Option<i64>) -> KnotComplex {
    let g = |s: &str, a: i64, mm: Q| Generator {
        name: format!("{prefix}{s}"),
        alexander: a,
        maslov: mm,
        spinc,
    };
    KnotComplex::new(
        vec![
            g("a", alex, m),
            g("b", alex - 1, m - q(1)),
            g("c", alex + 1, m + q(1)),
            g("d", alex, m),
        ],
        [(0, 1, 0), (0, 2, 1), (1, 3, 1), (2, 3, 0)],
    )
    .expect("box")
}

/// Two generators joined by a plain arrow.
pub fn acyclic_pair(prefix: &str, alex: i64, m: Q) -> KnotComplex {
    KnotComplex::new(
        vec![
            Generator::new(format!("{prefix}a"), alex, m),
            Generator::new(format!("{prefix}b"), alex, m - q(1)),
        ],
        [(0, 1, 0)],
    )
    .expect("pair")
}

/// Staircase with steps `(horizontal, vertical)`: corners `z_0..z_k`, and
/// `y_i -> z_i` plain plus `y_i -> U^{v_i} z_{i-1}`. `z_0` sits at
/// `(alex, m)`.
pub fn staircase(steps: &[(u32, u32)], alex: i64, m: Q) -> KnotComplex {
    let mut gens = vec![Generator::new("z0", alex, m)];
    let mut arrows = Vec::new();
    let (mut a, mut mm) = (alex, m);
    for (i, &(h, v)) in steps.iter().enumerate() {
        let ya = a - v as i64;
        let ym = mm + q(1) - q(2 * v as i64);
        gens.push(Generator::new(format!("y{}", i + 1), ya, ym));
        a = ya - h as i64;
        mm = ym - q(1);
        gens.push(Generator::new(format!("z{}", i + 1), a, mm));
        let y = 2 * i + 1;
        arrows.push((y, y + 1, 0));
        arrows.push((y, y - 1, v));
    }
    KnotComplex::new(gens, arrows).expect("staircase")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::frac;

    pub fn trefoil() -> KnotComplex {
        KnotComplex::from_named(
            vec![
                Generator::new("x1", 1, q(0)),
                Generator::new("x2", 0, q(-1)),
                Generator::new("x3", -1, q(-2)),
            ],
            &[("x2", "x3", 0), ("x2", "x1", 1)],
        )
        .unwrap()
    }

    #[test]
    fn examples_validate() {
        assert!(KnotComplex::unknot().validate().is_empty());
        assert!(trefoil().validate().is_empty());
        let bad = KnotComplex::from_named(
            trefoil().generators().to_vec(),
            &[("x2", "x3", 0), ("x2", "x1", 0)],
        )
        .unwrap();
        // the same arrow also breaks the filtration, since A(x1) > A(x2)
        let v = bad.validate();
        assert!(v.iter().any(
            |x| matches!(x, Violation::Maslov { from, to, m: 0 } if from == "x2" && to == "x1")
        ));
        assert!(v
            .iter()
            .all(|x| !matches!(x, Violation::BoundarySquared { .. })));
    }

    #[test]
    fn boundary_squared_detected() {
        let k = KnotComplex::new(
            vec![
                Generator::new("a", 0, q(2)),
                Generator::new("b", 0, q(1)),
                Generator::new("c", 0, q(0)),
            ],
            [(0, 1, 0), (1, 2, 0)],
        )
        .unwrap();
        assert!(k
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::BoundarySquared { .. })));
    }

    #[test]
    fn json_round_trip() {
        let k = trefoil().with_spinc(Some(2)).with_tower(Some(q(0)));
        let back = KnotComplex::from_json(&k.to_json()).unwrap();
        assert_eq!(back, k);
        let s = r#"{"generators":[{"name":"z","A":0,"M":"1/2","spinc":null}],"arrows":[]}"#;
        let u = KnotComplex::from_json(s).unwrap();
        assert_eq!(u.generators()[0].maslov, frac(1, 2));
        assert!(KnotComplex::from_json(
            r#"{"generators":[],"arrows":[{"from":"a","to":"b","m":0}]}"#
        )
        .is_err());
    }

    #[test]
    fn tensor_and_dual_shapes() {
        let t = trefoil();
        let tt = t.tensor(&t).unwrap();
        assert_eq!(tt.len(), 9);
        assert!(tt.validate().is_empty());
        let u = t.tensor(&KnotComplex::unknot()).unwrap();
        assert!(find_iso(&u.labeled_graph(), &t.labeled_graph(), false).is_some());
        let dd = t.dual().dual();
        assert!(find_iso(&dd.labeled_graph(), &t.labeled_graph(), false).is_some());
        assert!(t.dual().validate().is_empty());
    }

    #[test]
    fn direct_sum_renames() {
        let s = trefoil().direct_sum(&trefoil());
        assert_eq!(s.len(), 6);
        assert!(s.index_of("x1'").is_some());
        assert!(s.validate().is_empty());
    }

    #[test]
    fn builders_are_valid() {
        assert!(acyclic_box("q", 2, q(1), None).validate().is_empty());
        assert!(acyclic_pair("p", 0, q(0)).validate().is_empty());
        let s = staircase(&[(1, 1)], 1, q(0));
        assert!(find_iso(&s.labeled_graph(), &trefoil().labeled_graph(), false).is_some());
        assert!(staircase(&[(2, 1), (1, 3)], 0, q(0)).validate().is_empty());
    }
}
