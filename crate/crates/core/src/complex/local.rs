//! Search for filtered chain maps inducing isomorphisms on homology.
//!
//! A graded, bi-filtered, `U`-equivariant map is determined by one bit per
//! admissible generator pair `(x, y)`: `f(x)` may contain `U^n y` only
//! when `M(y) - 2n = M(x)`, `n >= 0` and `A(y) - n <= A(x)`. Both the
//! chain-map condition and "sends the tower generator to the tower
//! generator" are linear in those bits, so existence is decided by
//! solving a GF(2) system rather than by enumerating maps.

use super::homology::GradingSlice;
use super::{correction_term, ComplexError, KnotComplex};
use crate::gf2::{self, BitRow};
use crate::rational::half_int_diff;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub enum LocalEquiv {
    /// Maps `f: K1 -> K2` and `g: K2 -> K1` as `(x, y, n)` meaning
    /// `U^n y` is a term of the image of `x`.
    Equivalent {
        f: Vec<(usize, usize, u32)>,
        g: Vec<(usize, usize, u32)>,
    },
    NoneFound,
}

fn admissible(src: &KnotComplex, dst: &KnotComplex) -> Vec<(usize, usize, u32)> {
    let mut out = Vec::new();
    for (x, gx) in src.generators().iter().enumerate() {
        for (y, gy) in dst.generators().iter().enumerate() {
            if let Some(n) = half_int_diff(gy.maslov, gx.maslov) {
                if n >= 0 && gy.alexander - n <= gx.alexander {
                    out.push((x, y, n as u32));
                }
            }
        }
    }
    out
}

/// Map terms `x -> U^n y` as `(x, y, n)`.
type MapTerms = Vec<(usize, usize, u32)>;

fn solve_direction(
    src: &KnotComplex,
    dst: &KnotComplex,
    pairs: &[(usize, usize, u32)],
) -> Result<Option<MapTerms>, ComplexError> {
    let d = correction_term(src)?;
    let c1 = GradingSlice::new(src, d).coset()?;
    let c2 = GradingSlice::new(dst, correction_term(dst)?).coset()?;
    let var: BTreeMap<(usize, usize), usize> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(x, y, _))| ((x, y), i))
        .collect();
    let nv = pairs.len();
    let nl = c2.boundary_basis.len();
    let mut rows: BTreeMap<(u8, usize, usize), usize> = BTreeMap::new();
    let mut cols = vec![BitRow::default(); nv + nl];
    let mut rhs = BitRow::default();
    let row_of = |key: (u8, usize, usize), rows: &mut BTreeMap<_, usize>| {
        let n = rows.len();
        *rows.entry(key).or_insert(n)
    };
    let out2 = dst.out_lists();
    let out1 = src.out_lists();
    // chain-map condition, one equation per (x, z)
    for (&(x, y), &v) in &var {
        for &(z, _) in &out2[y] {
            let r = row_of((0, x, z), &mut rows);
            cols[v].flip(r);
        }
    }
    for (x, list) in out1.iter().enumerate() {
        for &(w, _) in list {
            for (&(w2, z), &v) in var.range((w, 0)..(w + 1, 0)) {
                debug_assert_eq!(w2, w);
                let r = row_of((0, x, z), &mut rows);
                cols[v].flip(r);
            }
        }
    }
    // tower condition: f(c1) + c2 is a boundary
    for &(x, _) in &c1.base.terms {
        for (&(_, y), &v) in var.range((x, 0)..(x + 1, 0)) {
            let r = row_of((1, y, 0), &mut rows);
            cols[v].flip(r);
        }
    }
    for &(y, _) in &c2.base.terms {
        let r = row_of((1, y, 0), &mut rows);
        rhs.flip(r);
    }
    for (i, b) in c2.boundary_basis.iter().enumerate() {
        for &(y, _) in &b.terms {
            let r = row_of((1, y, 0), &mut rows);
            cols[nv + i].flip(r);
        }
    }
    Ok(gf2::solve(&cols, &rhs)
        .map(|sol| sol.ones().filter(|&i| i < nv).map(|i| pairs[i]).collect()))
}

/// Looks for local equivalence maps in both directions. `cap` bounds the
/// number of candidate map pairs, `2^(unknown bits)`.
pub fn local_equiv_search(
    k1: &KnotComplex,
    k2: &KnotComplex,
    cap: u64,
) -> Result<LocalEquiv, ComplexError> {
    let pf = admissible(k1, k2);
    let pg = admissible(k2, k1);
    let bits = pf.len() + pg.len();
    if bits >= 64 || (1u64 << bits) > cap {
        return Err(ComplexError::CapExceeded {
            size: format!("2^{bits}"),
            cap,
        });
    }
    if correction_term(k1)? != correction_term(k2)? {
        return Ok(LocalEquiv::NoneFound);
    }
    let Some(f) = solve_direction(k1, k2, &pf)? else {
        return Ok(LocalEquiv::NoneFound);
    };
    let Some(g) = solve_direction(k2, k1, &pg)? else {
        return Ok(LocalEquiv::NoneFound);
    };
    Ok(LocalEquiv::Equivalent { f, g })
}
