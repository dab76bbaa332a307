//! Complexes of `T_{2,2n+1}` and of the twist knots `TW_n` as read off
//! genus one doubly pointed diagrams, and the tables of their lifts to the
//! branched double cover.
//!
//! A lifted generator is a pair `(a_i, b_j)` of preimages of downstairs
//! generators `x_i`, `x_j`. Its Alexander grading is `(A(x_i) + A(x_j))/2`
//! and its spin^c class is `i - j mod p`. Differentials are built only in
//! the class of the spin structure, where they copy the downstairs ones.

use crate::complex::{acyclic_box, staircase, ComplexError, Generator, KnotComplex};
use crate::grid::lens_d_general;
use crate::rational::{fmt_q, q, Q};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OneOneError {
    #[error("n must be at least 1")]
    Range,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Torus,
    Twist,
}

/// Reorders the generators of `k` by `order` (new position `i` holds old
/// generator `order[i]`) and names them `x1, x2, ...`.
fn relabel(k: &KnotComplex, order: &[usize]) -> KnotComplex {
    let mut pos = vec![0; k.len()];
    for (i, &o) in order.iter().enumerate() {
        pos[o] = i;
    }
    let gens = order
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let g = &k.generators()[o];
            Generator::new(format!("x{}", i + 1), g.alexander, g.maslov)
        })
        .collect();
    let arrows = k.arrows().iter().map(|a| (pos[a.from], pos[a.to], a.m));
    KnotComplex::new(gens, arrows).expect("relabel")
}

/// The staircase of `T_{2,2n+1}`: `x_1, ..., x_{2n+1}` with
/// `A(x_i) = n + 1 - i` and `∂x_{2i} = x_{2i+1} + U x_{2i-1}`.
pub fn torus_staircase(n: u32) -> Result<KnotComplex, OneOneError> {
    if n == 0 {
        return Err(OneOneError::Range);
    }
    let k = staircase(&vec![(1, 1); n as usize], n as i64, q(0));
    let order: Vec<usize> = (0..k.len()).collect();
    Ok(relabel(&k, &order))
}

/// The twist knot with `n` half twists. `TW_n` is thin with `τ = 1` for
/// odd `n` and `τ = 0` for even `n`, so its complex is a trefoil staircase
/// or a single generator plus `⌊n/2⌋` boxes on the diagonal `M = A + δ`.
/// Generators are numbered so that `A(x_i)` follows the (1,1)-diagram:
/// `0` when `i ≡ n + 1`, otherwise `+1` above `n + 1` and `-1` below.
pub fn twist_complex(n: u32) -> Result<KnotComplex, OneOneError> {
    if n == 0 {
        return Err(OneOneError::Range);
    }
    let (mut k, delta) = if n % 2 == 1 {
        (staircase(&[(1, 1)], 1, q(0)), -1)
    } else {
        (KnotComplex::unknot(), 0)
    };
    for b in 0..n / 2 {
        k = k.direct_sum(&acyclic_box(&format!("b{b}"), 0, q(delta), None));
    }
    let n = n as usize;
    let mut slots: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for i in 1..=2 * n + 1 {
        let a = if i % 2 == (n + 1) % 2 {
            0
        } else if i > n + 1 {
            1
        } else {
            -1
        };
        slots.entry(a).or_default().push(i - 1);
    }
    let mut order = vec![usize::MAX; k.len()];
    let mut next: BTreeMap<i64, usize> = BTreeMap::new();
    for (old, g) in k.generators().iter().enumerate() {
        let c = next.entry(g.alexander).or_default();
        order[slots[&g.alexander][*c]] = old;
        *c += 1;
    }
    Ok(relabel(&k, &order))
}

/// A downstairs complex with its generators in diagram order.
#[derive(Clone, Debug, PartialEq)]
pub struct OneOneComplex {
    family: Family,
    n: u32,
    complex: KnotComplex,
    homogeneous: Vec<bool>,
}

impl OneOneComplex {
    /// `T_{2,2n+1}` numbered as in its (1,1)-diagram: the staircase corners
    /// `s_1, s_3, ..., s_{2n+1}` (counted from the top) are the homogeneous
    /// generators `x_n, x_{n-1}, ..., x_1, x_{2n+1}`, and the middle
    /// generators `s_2, s_4, ..., s_{2n}` are `x_{n+1}, ..., x_{2n}`.
    pub fn torus(n: u32) -> Result<Self, OneOneError> {
        let s = torus_staircase(n)?;
        let n_ = n as usize;
        let mut order = Vec::with_capacity(2 * n_ + 1);
        for i in 1..=n_ {
            order.push(2 * (n_ - i));
        }
        for j in 1..=n_ {
            order.push(2 * j - 1);
        }
        order.push(2 * n_);
        let complex = relabel(&s, &order);
        let homogeneous = (1..=2 * n_ + 1)
            .map(|i| i <= n_ || i == 2 * n_ + 1)
            .collect();
        Ok(OneOneComplex {
            family: Family::Torus,
            n,
            complex,
            homogeneous,
        })
    }

    /// `TW_n`; the homogeneity flag records the parity of the index.
    pub fn twist(n: u32) -> Result<Self, OneOneError> {
        let complex = twist_complex(n)?;
        let homogeneous = (1..=complex.len()).map(|i| i % 2 == 1).collect();
        Ok(OneOneComplex {
            family: Family::Twist,
            n,
            complex,
            homogeneous,
        })
    }

    pub fn new(family: Family, n: u32) -> Result<Self, OneOneError> {
        match family {
            Family::Torus => Self::torus(n),
            Family::Twist => Self::twist(n),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Determinant `2n + 1`.
    pub fn p(&self) -> i64 {
        2 * self.n as i64 + 1
    }

    pub fn complex(&self) -> &KnotComplex {
        &self.complex
    }

    pub fn homogeneous(&self) -> &[bool] {
        &self.homogeneous
    }

    /// Whether `(a_i, b_j)` is a generator upstairs (1-based indices).
    pub fn admissible(&self, i: usize, j: usize) -> bool {
        match self.family {
            Family::Torus => self.homogeneous[i - 1] == self.homogeneous[j - 1],
            Family::Twist => i % 2 == j % 2,
        }
    }

    /// `d` of the branched double cover in the spin structure: `L(p, 1)`
    /// for the torus knots and `-L(p, 2)` for the twist knots.
    pub fn spin_d(&self) -> Q {
        let p = self.p();
        match self.family {
            Family::Torus => lens_d_general(p, 1, 0),
            Family::Twist => -lens_d_general(p, 2, (p + 1) / 2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LiftRow {
    pub i: usize,
    pub j: usize,
    pub alexander: Q,
    pub spinc: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftTable {
    pub p: i64,
    pub rows: Vec<LiftRow>,
}

impl LiftTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,A,class\n");
        for r in &self.rows {
            writeln!(s, "{},{},{},{}", r.i, r.j, fmt_q(&r.alexander), r.spinc).expect("write");
        }
        s
    }

    /// Rows grouped by spin^c class.
    pub fn classes(&self) -> BTreeMap<i64, Vec<&LiftRow>> {
        let mut m: BTreeMap<i64, Vec<&LiftRow>> = BTreeMap::new();
        for r in &self.rows {
            m.entry(r.spinc).or_default().push(r);
        }
        m
    }
}

/// `x mod p` in `(-p/2, p/2]`.
fn symmetric_mod(x: i64, p: i64) -> i64 {
    let r = x.rem_euclid(p);
    if 2 * r > p {
        r - p
    } else {
        r
    }
}

/// Every admissible pair `(i, j)` with its Alexander grading and class.
pub fn lift_table(k: &OneOneComplex) -> LiftTable {
    let gens = k.complex.generators();
    let p = k.p();
    let mut rows = Vec::new();
    for i in 1..=gens.len() {
        for j in 1..=gens.len() {
            if k.admissible(i, j) {
                rows.push(LiftRow {
                    i,
                    j,
                    alexander: Q::new(gens[i - 1].alexander + gens[j - 1].alexander, 2),
                    spinc: symmetric_mod(i as i64 - j as i64, p),
                });
            }
        }
    }
    LiftTable { p, rows }
}

/// The diagonal generators `(a_i, b_i)` with the downstairs arrows, placed
/// in the branched cover: Maslov gradings move by `d` of the spin
/// structure.
pub fn lift_s0_complex(k: &OneOneComplex) -> KnotComplex {
    let d = k.spin_d();
    let gens = k
        .complex
        .generators()
        .iter()
        .enumerate()
        .map(|(i, g)| Generator {
            name: format!("a{0}b{0}", i + 1),
            alexander: g.alexander,
            maslov: g.maslov + d,
            spinc: Some(0),
        })
        .collect();
    let arrows = k.complex.arrows().iter().map(|a| (a.from, a.to, a.m));
    KnotComplex::new(gens, arrows)
        .expect("lift")
        .with_tower(Some(d))
}

/// Classes all of whose generators sit in Alexander grading zero. The
/// complex in such a class is supported on one line, so `Υ ≡ 0` there.
pub fn zero_alexander_classes(t: &LiftTable) -> Vec<i64> {
    t.classes()
        .into_iter()
        .filter(|(_, rows)| rows.iter().all(|r| r.alexander == q(0)))
        .map(|(c, _)| c)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::correction_term;
    use crate::concordance::{alexander_polynomial, det_m, IntLaurentPoly};
    use crate::grid::{build_torus_grid, spinc_slice};
    use crate::upsilon::{upsilon_function, PiecewiseLinear};
    use num_bigint::BigUint;
    use num_traits::Signed;

    fn iso(a: &KnotComplex, b: &KnotComplex, shift: bool) -> bool {
        crate::complex::find_iso(&a.labeled_graph(), &b.labeled_graph(), shift).is_some()
    }

    #[test]
    fn torus_complexes() {
        let t1 = torus_staircase(1).unwrap();
        let tre = staircase(&[(1, 1)], 1, q(0));
        assert!(iso(&t1, &tre, false));
        for n in 1..=6 {
            let k = torus_staircase(n).unwrap();
            assert!(k.validate().is_empty());
            assert_eq!(k.len(), 2 * n as usize + 1);
            assert_eq!(correction_term(&k), Ok(q(0)));
            for (i, g) in k.generators().iter().enumerate() {
                assert_eq!(g.alexander, n as i64 - i as i64);
            }
        }
        let u = upsilon_function(&torus_staircase(2).unwrap()).unwrap();
        assert_eq!(u.eval(q(1)), q(-2));
        assert!(torus_staircase(0).is_err());
    }

    #[test]
    fn twist_complexes() {
        assert!(iso(
            &twist_complex(1).unwrap(),
            &torus_staircase(1).unwrap(),
            false
        ));
        let k = twist_complex(2).unwrap();
        assert_eq!(k.len(), 5);
        let mut a: Vec<i64> = k.generators().iter().map(|g| g.alexander).collect();
        a.sort();
        assert_eq!(a, vec![-1, 0, 0, 0, 1]);
        assert!(upsilon_function(&k).unwrap().is_zero());
        for n in 1..=10u32 {
            let k = twist_complex(n).unwrap();
            assert!(k.validate().is_empty());
            assert_eq!(correction_term(&k), Ok(q(0)));
            let n_ = n as usize;
            for (i, g) in k.generators().iter().enumerate() {
                let i = i + 1;
                let want = if i % 2 == (n_ + 1) % 2 {
                    0
                } else if i > n_ + 1 {
                    1
                } else {
                    -1
                };
                assert_eq!(g.alexander, want, "n={n} x{i}");
            }
            let delta = alexander_polynomial(&k).unwrap();
            let h = (n as i64 + 1) / 2;
            let want = if n % 2 == 0 {
                IntLaurentPoly::from_terms([
                    (1, -(n as i64) / 2),
                    (0, n as i64 + 1),
                    (-1, -(n as i64) / 2),
                ])
            } else {
                IntLaurentPoly::from_terms([(1, h), (0, -(n as i64)), (-1, h)])
            };
            assert_eq!(delta, want);
            assert_eq!(det_m(&delta, 2), BigUint::from(2 * n + 1));
            let tau = if n % 2 == 1 { 1 } else { 0 };
            assert_eq!(
                upsilon_function(&k).unwrap(),
                PiecewiseLinear::tent(q(-tau))
            );
        }
    }

    #[test]
    fn torus_table() {
        let k = OneOneComplex::torus(2).unwrap();
        let t = lift_table(&k);
        assert_eq!(t.rows.len(), 13);
        let max = t.rows.iter().map(|r| r.alexander).max().unwrap();
        assert_eq!(max, q(2));
        for n in 1..=6u32 {
            let k = OneOneComplex::torus(n).unwrap();
            let t = lift_table(&k);
            let n_ = n as usize;
            assert_eq!(t.rows.len(), (n_ + 1).pow(2) + n_.pow(2));
            // arrows join homogeneous and inhomogeneous generators
            for a in k.complex().arrows() {
                assert_ne!(k.homogeneous()[a.from], k.homogeneous()[a.to]);
            }
            for r in &t.rows {
                let extreme = (r.i == n_ && r.j == n_) || (r.i == 2 * n_ + 1 && r.j == 2 * n_ + 1);
                if extreme {
                    assert_eq!(r.alexander.abs(), q(n as i64));
                } else {
                    assert!(r.alexander.abs() < q(n as i64), "{r:?}");
                }
            }
            assert_eq!(zero_alexander_classes(&t), vec![-(n as i64), n as i64]);
        }
    }

    #[test]
    fn tables_symmetric() {
        for k in [
            OneOneComplex::torus(3).unwrap(),
            OneOneComplex::twist(4).unwrap(),
            OneOneComplex::twist(5).unwrap(),
        ] {
            let t = lift_table(&k);
            let classes = t.classes();
            for (c, rows) in &classes {
                let mut a: Vec<Q> = rows.iter().map(|r| r.alexander).collect();
                let mut b: Vec<Q> = classes[&-c].iter().map(|r| -r.alexander).collect();
                a.sort();
                b.sort();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn twist_zero_classes() {
        let t = lift_table(&OneOneComplex::twist(2).unwrap());
        let z = zero_alexander_classes(&t);
        // rows with |i - j| > n + 1 sit in classes ±1
        for r in &t.rows {
            if (r.i as i64 - r.j as i64).abs() > 3 {
                assert_eq!(r.alexander, q(0));
                assert_eq!(r.spinc.abs(), 1);
            }
        }
        assert!(z.contains(&1) && z.contains(&-1));
        // class ±2 holds (3,1), (5,3), (4,2) and mirrors, all at A = 0
        assert_eq!(z, vec![-2, -1, 1, 2]);
        let t1 = lift_table(&OneOneComplex::twist(1).unwrap());
        assert_eq!(zero_alexander_classes(&t1), vec![-1, 1]);
    }

    #[test]
    fn s0_lifts() {
        for n in 1..=5u32 {
            let k = OneOneComplex::torus(n).unwrap();
            let s0 = lift_s0_complex(&k);
            assert!(s0.validate().is_empty());
            assert!(iso(k.complex(), &s0, true));
            assert_eq!(
                upsilon_function(&s0).unwrap(),
                upsilon_function(k.complex()).unwrap()
            );
            let grid = build_torus_grid(2 * n as i64 + 1).unwrap();
            let slice = spinc_slice(&grid, 0).unwrap();
            assert_eq!(correction_term(&s0), correction_term(&slice));
            assert_eq!(
                upsilon_function(&s0).unwrap(),
                upsilon_function(&slice).unwrap()
            );
        }
        for n in 1..=6u32 {
            let k = OneOneComplex::twist(n).unwrap();
            let s0 = lift_s0_complex(&k);
            assert!(s0.validate().is_empty());
            assert!(iso(k.complex(), &s0, true));
            assert_eq!(
                upsilon_function(&s0).unwrap(),
                upsilon_function(k.complex()).unwrap()
            );
        }
        let t1 = lift_s0_complex(&OneOneComplex::twist(1).unwrap());
        let u1 = lift_s0_complex(&OneOneComplex::torus(1).unwrap());
        assert!(iso(&t1, &u1, false));
        assert_eq!(
            correction_term(&lift_s0_complex(&OneOneComplex::twist(4).unwrap())),
            Ok(q(0))
        );
    }

    /// Per class, the grid slice's Euler characteristic is `(1 - t)` times
    /// the signed count of lifted generators: the grid carries the extra
    /// two-generator factor, the (1,1)-diagram does not.
    #[test]
    fn euler_characteristics_match_grid() {
        use crate::grid::{build_torus_grid, spinc_slice};
        for n in 1..=4u32 {
            let k = OneOneComplex::torus(n).unwrap();
            let classes = lift_table(&k);
            let classes = classes.classes();
            let grid = build_torus_grid(k.p()).unwrap();
            for (h, rows) in classes {
                let slice = spinc_slice(&grid, h).unwrap();
                let d = correction_term(&slice).unwrap();
                let mut want: BTreeMap<i64, i64> = BTreeMap::new();
                for g in slice.generators() {
                    let s = if (g.maslov - d).to_integer() % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    *want.entry(g.alexander).or_default() += s;
                }
                let mut got: BTreeMap<i64, i64> = BTreeMap::new();
                for r in rows {
                    let a = r.alexander.to_integer();
                    let s = if a % 2 == 0 { 1 } else { -1 };
                    *got.entry(a).or_default() += s;
                    *got.entry(a + 1).or_default() -= s;
                }
                want.retain(|_, v| *v != 0);
                got.retain(|_, v| *v != 0);
                let flip: BTreeMap<i64, i64> = got.iter().map(|(a, v)| (*a, -v)).collect();
                assert!(want == got || want == flip, "n={n} h={h}");
            }
        }
    }
}
