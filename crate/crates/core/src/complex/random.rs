//! Random knot-type complexes for property checks.
//!
//! A small known base (unknot, trefoils, figure eight, staircases) is
//! padded with acyclic pairs and boxes and then scrambled by filtered
//! changes of basis `x_i ← x_i + U^k x_j`. The result is filtered chain
//! homotopy equivalent to the base, so its invariants are the base's.

use super::{acyclic_box, acyclic_pair, staircase, Generator, KnotComplex};
use crate::gf2::BitRow;
use crate::rational::q;
use rand::Rng;

/// One of the small bases together with its name.
pub fn random_base<R: Rng + ?Sized>(rng: &mut R) -> (&'static str, KnotComplex) {
    let tre = staircase(&[(1, 1)], 1, q(0));
    match rng.random_range(0..6) {
        0 => ("unknot", KnotComplex::unknot()),
        1 => ("trefoil", tre),
        2 => ("mirror trefoil", tre.dual()),
        3 => (
            "figure eight",
            KnotComplex::unknot().direct_sum(&acyclic_box("f", 0, q(0), None)),
        ),
        4 => (
            "staircase (1,2),(2,1)",
            staircase(&[(1, 2), (2, 1)], 3, q(0)),
        ),
        _ => ("staircase (1,2)", staircase(&[(1, 2)], 2, q(0))),
    }
}

/// Base padded to at most `max_gens` generators and scrambled.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, max_gens: usize) -> KnotComplex {
    let (_, mut k) = random_base(rng);
    if k.len() > max_gens {
        k = KnotComplex::unknot();
    }
    let mut count = 0;
    loop {
        let room = max_gens - k.len();
        if room < 2 || rng.random_bool(0.35) {
            break;
        }
        let a = rng.random_range(-2..=2);
        let m = q(rng.random_range(-3..=3));
        let piece = if room >= 4 && rng.random_bool(0.5) {
            acyclic_box(&format!("p{count}"), a, m, None)
        } else {
            acyclic_pair(&format!("p{count}"), a, m)
        };
        k = k.direct_sum(&piece);
        count += 1;
    }
    let steps = rng.random_range(0..4 * k.len().max(1));
    for _ in 0..steps {
        let i = rng.random_range(0..k.len());
        let j = rng.random_range(0..k.len());
        if let Some(next) = change_basis(&k, i, j) {
            k = next;
        }
    }
    k
}

/// Replaces `x_i` by `x_i + U^k x_j` when that is a graded, filtered change
/// of basis. Arrow exponents are fixed by the Maslov gradings, so only the
/// incidence matrix changes: row `i` gains row `j`, column `j` gains
/// column `i`.
pub fn change_basis(k: &KnotComplex, i: usize, j: usize) -> Option<KnotComplex> {
    if i == j {
        return None;
    }
    let (gi, gj) = (&k.generators()[i], &k.generators()[j]);
    let two_k = gj.maslov - gi.maslov;
    if !two_k.is_integer() || two_k.to_integer() < 0 || two_k.to_integer() % 2 != 0 {
        return None;
    }
    let e = two_k.to_integer() / 2;
    if gj.alexander - e > gi.alexander {
        return None;
    }
    let n = k.len();
    let mut rows = vec![BitRow::zeros(n); n];
    for a in k.arrows() {
        rows[a.from].flip(a.to);
    }
    let rj = rows[j].clone();
    rows[i].xor(&rj);
    for r in rows.iter_mut() {
        if r.get(i) {
            r.flip(j);
        }
    }
    let gens: Vec<Generator> = k.generators().to_vec();
    let mut arrows = Vec::new();
    for (f, r) in rows.iter().enumerate() {
        for t in r.ones() {
            let m = gens[t].maslov - gens[f].maslov + q(1);
            let m = m / q(2);
            if !m.is_integer() || m.to_integer() < 0 {
                return None;
            }
            arrows.push((f, t, m.to_integer() as u32));
        }
    }
    let out = KnotComplex::new(gens, arrows).ok()?.with_tower(k.tower());
    out.validate().is_empty().then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::correction_term;
    use crate::upsilon::upsilon_function;
    use rand::SeedableRng;

    #[test]
    fn scrambling_keeps_invariants() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut changed = 0;
        for _ in 0..40 {
            let k = random_complex(&mut rng, 8);
            assert!(k.len() <= 8);
            assert!(k.validate().is_empty());
            let mut j = k.clone();
            for _ in 0..20 {
                let a = rng.random_range(0..j.len());
                let b = rng.random_range(0..j.len());
                if let Some(n) = change_basis(&j, a, b) {
                    if n.arrows() != j.arrows() {
                        changed += 1;
                    }
                    j = n;
                }
            }
            assert_eq!(correction_term(&j), correction_term(&k));
            assert_eq!(upsilon_function(&j).unwrap(), upsilon_function(&k).unwrap());
        }
        assert!(changed > 0);
    }
}
