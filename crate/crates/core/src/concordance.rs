//! Branched-cover obstructions: determinants of cyclic covers, subgroups of
//! order `sqrt|H|`, slice and concordance tests, the finite order test and
//! the independence check for alternating torus knots.

use crate::complex::{correction_term, ComplexError, KnotComplex};
use crate::exec::Exec;
use crate::rational::{fmt_q, parse_q, q, Q};
use crate::upsilon::PiecewiseLinear;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

pub const DEFAULT_CAP: u64 = 10_000;
/// Upper bound on the number of subgroups any single search may return.
pub const SUBGROUP_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConcordanceError {
    #[error("cyclic factor orders must be at least 1")]
    BadOrder,
    #[error("{0:?} is not an element of the group")]
    BadElement(Vec<u64>),
    #[error("search cap exceeded: {what} is {size}, cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u64,
    },
    #[error("Upsilon map breaks conjugation symmetry at {0:?}")]
    Asymmetric(Vec<u64>),
    #[error("Upsilon map has no value at {0:?}")]
    Missing(Vec<u64>),
    #[error("coefficient and component lists have lengths {0} and {1}")]
    Misaligned(usize, usize),
    #[error("group order {supplied} disagrees with the determinant {det}")]
    OrderMismatch { supplied: u128, det: BigUint },
    #[error("not a knot polynomial: value {0} at t = 1")]
    NotKnotPolynomial(BigInt),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Integer Laurent polynomial in `t`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntLaurentPoly {
    coeffs: BTreeMap<i64, BigInt>,
}

impl IntLaurentPoly {
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut coeffs: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (e, c) in terms {
            *coeffs.entry(e).or_default() += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        IntLaurentPoly { coeffs }
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, BigInt> {
        &self.coeffs
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.coeffs.get(&e).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at `t = ±1`.
    pub fn eval_sign(&self, minus: bool) -> BigInt {
        self.coeffs
            .iter()
            .map(|(e, c)| {
                if minus && e.is_odd() {
                    -c.clone()
                } else {
                    c.clone()
                }
            })
            .sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(e, c)| self.coeffs.get(&-e) == Some(c))
    }

    /// Multiplies by `±t^k` so that the result is symmetric with positive
    /// value at `1`, if such a normalization exists.
    pub fn symmetrized(&self) -> Option<Self> {
        let (lo, hi) = (*self.coeffs.keys().next()?, *self.coeffs.keys().last()?);
        if (lo + hi).is_odd() {
            return None;
        }
        let shift = -(lo + hi) / 2;
        let sign = if self.eval_sign(false).is_negative() {
            -1
        } else {
            1
        };
        let out = IntLaurentPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (e + shift, c * sign))
                .collect(),
        };
        out.is_symmetric().then_some(out)
    }

    /// Checks `Δ(1) = ±1`.
    pub fn check_knot(&self) -> Result<(), ConcordanceError> {
        let v = self.eval_sign(false);
        if v.abs().is_one() {
            Ok(())
        } else {
            Err(ConcordanceError::NotKnotPolynomial(v))
        }
    }

    /// Coefficients reduced cyclically modulo `x^m - 1`.
    fn cyclic(&self, m: usize) -> Vec<BigInt> {
        let mut c = vec![BigInt::zero(); m];
        for (e, v) in &self.coeffs {
            c[e.rem_euclid(m as i64) as usize] += v;
        }
        c
    }

    /// Parses sums such as `t - 1 + t^-1`, `-2t + 5 - 2t^-1` or `3*t^2`.
    pub fn parse(s: &str) -> Result<Self, ConcordanceError> {
        let err = || ConcordanceError::Parse(format!("bad polynomial {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err());
        }
        // split before every sign that does not follow '^'
        let mut pieces: Vec<String> = Vec::new();
        let mut prev = None;
        for c in compact.chars() {
            if (c == '+' || c == '-') && prev.is_some() && prev != Some('^') {
                pieces.push(String::new());
            }
            match pieces.last_mut() {
                Some(p) => p.push(c),
                None => pieces.push(c.to_string()),
            }
            prev = Some(c);
        }
        let mut terms = Vec::new();
        for piece in &pieces {
            let (neg, term) = match piece.strip_prefix('-') {
                Some(t) => (true, t),
                None => (false, piece.strip_prefix('+').unwrap_or(piece)),
            };
            let (coef, exp) = match term.find('t') {
                None => (term.parse::<i64>().map_err(|_| err())?, 0),
                Some(i) => {
                    let c = term[..i].trim_end_matches('*');
                    let c = if c.is_empty() {
                        1
                    } else {
                        c.parse::<i64>().map_err(|_| err())?
                    };
                    let e = &term[i + 1..];
                    let e = if e.is_empty() {
                        1
                    } else {
                        e.strip_prefix('^')
                            .ok_or_else(err)?
                            .parse::<i64>()
                            .map_err(|_| err())?
                    };
                    (c, e)
                }
            };
            terms.push((exp, if neg { -coef } else { coef }));
        }
        Ok(IntLaurentPoly::from_terms(terms))
    }
}

impl fmt::Display for IntLaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.coeffs.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            match *e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}")?;
                    }
                    if *e == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Graded Euler characteristic `Σ (-1)^(M - d) t^A`, normalized to be
/// symmetric with value `1` at `t = 1`.
pub fn alexander_polynomial(k: &KnotComplex) -> Result<IntLaurentPoly, ConcordanceError> {
    let d = correction_term(k)?;
    let p = IntLaurentPoly::from_terms(k.generators().iter().map(|g| {
        let m = g.maslov - d;
        let sign = if (m.to_integer()).is_odd() { -1 } else { 1 };
        (g.alexander, sign)
    }));
    let p = p
        .symmetrized()
        .ok_or_else(|| ConcordanceError::Parse("Euler characteristic is not symmetric".into()))?;
    p.check_knot()?;
    Ok(p)
}

/// Determinant by fraction-free elimination.
fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return BigInt::zero();
        };
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    prev * sign
}

/// `|Res(x^m - 1, Δ)|`, the order of the first homology of the `m`-fold
/// cyclic branched cover (zero means infinite). Multiplication by `Δ` on
/// `Z[x]/(x^m - 1)` is a circulant matrix whose determinant is the
/// resultant.
pub fn det_m(delta: &IntLaurentPoly, m: u32) -> BigUint {
    let m = m.max(1) as usize;
    let c = delta.cyclic(m);
    let rows = (0..m)
        .map(|i| (0..m).map(|j| c[(i + m - j) % m].clone()).collect())
        .collect();
    bareiss_det(rows).magnitude().clone()
}

pub fn check_group_order(
    group: &FiniteAbelianGroup,
    delta: &IntLaurentPoly,
    m: u32,
) -> Result<(), ConcordanceError> {
    let det = det_m(delta, m);
    if BigUint::from(group.order()) == det {
        Ok(())
    } else {
        Err(ConcordanceError::OrderMismatch {
            supplied: group.order(),
            det,
        })
    }
}

/// `⊕ Z_{n_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteAbelianGroup {
    orders: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<u64>) -> Result<Self, ConcordanceError> {
        if orders.contains(&0) {
            return Err(ConcordanceError::BadOrder);
        }
        Ok(FiniteAbelianGroup { orders })
    }

    pub fn cyclic(n: u64) -> Result<Self, ConcordanceError> {
        Self::new(vec![n])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn order(&self) -> u128 {
        self.orders.iter().map(|&n| n as u128).product()
    }

    pub fn product(&self, other: &Self) -> Self {
        FiniteAbelianGroup {
            orders: self.orders.iter().chain(&other.orders).copied().collect(),
        }
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.orders.len()]
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        x.len() == self.orders.len() && x.iter().zip(&self.orders).all(|(a, n)| a < n)
    }

    /// Reduces arbitrary integers into the group.
    pub fn element(&self, x: &[i64]) -> Result<Vec<u64>, ConcordanceError> {
        if x.len() != self.orders.len() {
            return Err(ConcordanceError::BadElement(
                x.iter().map(|&v| v as u64).collect(),
            ));
        }
        Ok(x.iter()
            .zip(&self.orders)
            .map(|(&a, &n)| a.rem_euclid(n as i64) as u64)
            .collect())
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.orders)
            .map(|((x, y), n)| (x + y) % n)
            .collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(&self.orders)
            .map(|(x, n)| (n - x) % n)
            .collect()
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &n in &self.orders {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..n).map(move |a| {
                        let mut w = v.clone();
                        w.push(a);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// Elements `x` with `p x = 0`, `x ≠ 0`.
    fn torsion(&self, p: u64) -> Vec<Vec<u64>> {
        self.elements()
            .into_iter()
            .filter(|x| {
                x.iter().any(|&a| a != 0)
                    && x.iter()
                        .zip(&self.orders)
                        .all(|(a, n)| (a * p).is_multiple_of(*n))
            })
            .collect()
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.orders.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// A subgroup, stored as its sorted element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    elements: Vec<Vec<u64>>,
}

impl Subgroup {
    pub fn elements(&self) -> &[Vec<u64>] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.elements
            .binary_search_by(|e| e.as_slice().cmp(x))
            .is_ok()
    }

    pub fn is_closed_under_negation(&self, g: &FiniteAbelianGroup) -> bool {
        self.elements.iter().all(|x| self.contains(&g.neg(x)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SquareRoots {
    NotSquare { order: u128 },
    Subgroups(Vec<Subgroup>),
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn isqrt(n: u128) -> Option<u128> {
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Mixed-radix encoding of `⊕ Z_{m_i}`.
struct Radix {
    mods: Vec<u64>,
    size: usize,
}

impl Radix {
    fn new(mods: Vec<u64>) -> Self {
        let size = mods.iter().product::<u64>() as usize;
        Radix { mods, size }
    }

    fn decode(&self, mut c: usize) -> Vec<u64> {
        let mut out = vec![0; self.mods.len()];
        for i in (0..self.mods.len()).rev() {
            out[i] = c as u64 % self.mods[i];
            c /= self.mods[i] as usize;
        }
        out
    }

    fn encode(&self, x: &[u64]) -> usize {
        x.iter()
            .zip(&self.mods)
            .fold(0usize, |acc, (a, n)| acc * *n as usize + *a as usize)
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u64> = x
            .iter()
            .zip(&y)
            .zip(&self.mods)
            .map(|((u, v), n)| (u + v) % n)
            .collect();
        self.encode(&s)
    }

    /// `⟨S, g⟩` for a subgroup `S`.
    fn extend(&self, s: &[usize], g: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut mult = 0;
        loop {
            out.extend(s.iter().map(|&x| self.add(x, mult)));
            mult = self.add(mult, g);
            if mult == 0 || s.binary_search(&mult).is_ok() {
                break;
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Subgroups of order `target` in a `p`-group, grown one index-`p` step at
/// a time. Every subgroup of a `p`-group has a composition series with
/// factors `Z_p`, so this reaches all of them.
fn p_subgroups(
    r: &Radix,
    p: u64,
    target: usize,
    exec: Exec,
) -> Result<Vec<Vec<usize>>, ConcordanceError> {
    let mut level = vec![vec![0usize]];
    let mut size = 1;
    while size < target {
        let grown = exec.map(&level, |s| {
            let mut covered = vec![false; r.size];
            for &x in s {
                covered[x] = true;
            }
            let mut found = Vec::new();
            for g in 0..r.size {
                if covered[g] {
                    continue;
                }
                let t = r.extend(s, g);
                if t.len() == s.len() * p as usize {
                    for &x in &t {
                        covered[x] = true;
                    }
                    found.push(t);
                }
            }
            found
        });
        let next: BTreeSet<Vec<usize>> = grown.into_iter().flatten().collect();
        if next.len() > SUBGROUP_LIMIT {
            return Err(ConcordanceError::CapExceeded {
                what: "subgroup count",
                size: next.len() as u128,
                cap: SUBGROUP_LIMIT as u64,
            });
        }
        level = next.into_iter().collect();
        size *= p as usize;
    }
    Ok(level)
}

/// All subgroups of order `sqrt|H|`. The search splits `H` into primary
/// components and enumerates each one, so `cap` bounds the order of a
/// single component.
pub fn square_root_subgroups(
    h: &FiniteAbelianGroup,
    cap: u64,
    exec: Exec,
) -> Result<SquareRoots, ConcordanceError> {
    let order = h.order();
    let Some(root) = isqrt(order) else {
        return Ok(SquareRoots::NotSquare { order });
    };
    let mut primes: BTreeSet<u64> = BTreeSet::new();
    for &n in h.orders() {
        primes.extend(prime_factors(n));
    }
    let mut acc: Vec<BTreeSet<Vec<u64>>> = vec![BTreeSet::from([h.zero()])];
    for &p in &primes {
        let mut idx = Vec::new();
        let mut mods = Vec::new();
        let mut coef = Vec::new();
        for (i, &n) in h.orders().iter().enumerate() {
            let mut pe = 1;
            while n % (pe * p) == 0 {
                pe *= p;
            }
            if pe > 1 {
                let rest = n / pe;
                // idempotent: 1 mod p^e, 0 mod the rest
                let inv = (1..pe).find(|&x| (x * rest) % pe == 1).unwrap_or(0);
                idx.push(i);
                mods.push(pe);
                coef.push((rest * inv) % n);
            }
        }
        let comp_order: u128 = mods.iter().map(|&m| m as u128).product();
        if comp_order > cap as u128 {
            return Err(ConcordanceError::CapExceeded {
                what: "primary component order",
                size: comp_order,
                cap,
            });
        }
        let mut target = 1u128;
        while root % (target * p as u128) == 0 {
            target *= p as u128;
        }
        let r = Radix::new(mods);
        let subs = p_subgroups(&r, p, target as usize, exec)?;
        let total = acc.len() as u128 * subs.len() as u128;
        if total > SUBGROUP_LIMIT as u128 {
            return Err(ConcordanceError::CapExceeded {
                what: "subgroup count",
                size: total,
                cap: SUBGROUP_LIMIT as u64,
            });
        }
        let embedded: Vec<Vec<Vec<u64>>> = subs
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&c| {
                        let y = r.decode(c);
                        let mut x = h.zero();
                        for (k, &i) in idx.iter().enumerate() {
                            x[i] = (y[k] * coef[k]) % h.orders()[i];
                        }
                        x
                    })
                    .collect()
            })
            .collect();
        acc = acc
            .iter()
            .flat_map(|a| {
                embedded.iter().map(move |e| {
                    a.iter()
                        .flat_map(|x| e.iter().map(move |y| h.add(x, y)))
                        .collect()
                })
            })
            .collect();
    }
    Ok(SquareRoots::Subgroups(
        acc.into_iter()
            .map(|s| Subgroup {
                elements: s.into_iter().collect(),
            })
            .collect(),
    ))
}

/// Subgroups of order exactly `p`, one per line.
pub fn order_p_subgroups(h: &FiniteAbelianGroup, p: u64) -> Vec<Subgroup> {
    let mut seen: BTreeSet<Subgroup> = BTreeSet::new();
    for g in h.torsion(p) {
        let mut el = vec![h.zero()];
        let mut x = g.clone();
        while x != h.zero() {
            el.push(x.clone());
            x = h.add(&x, &g);
        }
        el.sort();
        if el.len() as u64 == p {
            seen.insert(Subgroup { elements: el });
        }
    }
    seen.into_iter().collect()
}

/// `Υ` indexed by spin^c twists `ξ ∈ H`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonMap {
    group: FiniteAbelianGroup,
    values: BTreeMap<Vec<u64>, PiecewiseLinear>,
}

impl UpsilonMap {
    /// Values given on one of `ξ, -ξ` are copied to the other; values given
    /// on both must agree.
    pub fn new(
        group: FiniteAbelianGroup,
        values: BTreeMap<Vec<u64>, PiecewiseLinear>,
    ) -> Result<Self, ConcordanceError> {
        let mut full = values.clone();
        for (x, f) in &values {
            if !group.contains(x) {
                return Err(ConcordanceError::BadElement(x.clone()));
            }
            let nx = group.neg(x);
            match values.get(&nx) {
                Some(g) if !g.sub(f).is_zero() => {
                    return Err(ConcordanceError::Asymmetric(x.clone()))
                }
                _ => {
                    full.insert(nx, f.clone());
                }
            }
        }
        Ok(UpsilonMap {
            group,
            values: full,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &BTreeMap<Vec<u64>, PiecewiseLinear> {
        &self.values
    }

    pub fn get(&self, x: &[u64]) -> Result<&PiecewiseLinear, ConcordanceError> {
        self.values
            .get(x)
            .ok_or_else(|| ConcordanceError::Missing(x.to_vec()))
    }

    pub fn is_total(&self) -> bool {
        self.values.len() as u128 == self.group.order()
    }

    /// Map on `Z_n` from a list of `(label, Υ)` with integer labels.
    pub fn cyclic(n: u64, labeled: &[(i64, PiecewiseLinear)]) -> Result<Self, ConcordanceError> {
        let g = FiniteAbelianGroup::cyclic(n)?;
        let mut values = BTreeMap::new();
        for (h, f) in labeled {
            values.insert(g.element(&[*h])?, f.clone());
        }
        Self::new(g, values)
    }

    /// JSON of the form `{"group": [n..], "upsilon": {"1,0": [[t, v], ..]}}`.
    /// Keys may carry brackets and negative entries; `t`, `v` may be
    /// numbers or rational strings.
    pub fn from_json(s: &str) -> Result<Self, ConcordanceError> {
        let perr = |m: &str| ConcordanceError::Parse(m.to_string());
        let v: Value = serde_json::from_str(s).map_err(|e| perr(&e.to_string()))?;
        let orders: Vec<u64> = v["group"]
            .as_array()
            .ok_or_else(|| perr("missing \"group\" array"))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .ok_or_else(|| perr("group orders must be integers"))
            })
            .collect::<Result<_, _>>()?;
        let group = FiniteAbelianGroup::new(orders)?;
        let table = v["upsilon"]
            .as_object()
            .ok_or_else(|| perr("missing \"upsilon\" object"))?;
        let num = |x: &Value| -> Result<Q, ConcordanceError> {
            match x {
                Value::String(s) => parse_q(s).map_err(|e| perr(&e)),
                Value::Number(n) => parse_q(&n.to_string()).map_err(|e| perr(&e)),
                _ => Err(perr("breakpoints must be numbers or strings")),
            }
        };
        let mut values = BTreeMap::new();
        for (key, pts) in table {
            let raw: Vec<i64> = key
                .trim_matches(|c| c == '[' || c == ']' || c == '(' || c == ')')
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<i64>()
                        .map_err(|_| perr(&format!("bad key {key:?}")))
                })
                .collect::<Result<_, _>>()?;
            let x = group.element(&raw)?;
            let pts = pts
                .as_array()
                .ok_or_else(|| perr("breakpoint list expected"))?
                .iter()
                .map(|p| match p.as_array().map(|a| a.as_slice()) {
                    Some([t, v]) => Ok((num(t)?, num(v)?)),
                    _ => Err(perr("breakpoints are [t, v] pairs")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let f = PiecewiseLinear::new(pts).map_err(|e| perr(&e.to_string()))?;
            values.insert(x, f);
        }
        Self::new(group, values)
    }

    pub fn to_json(&self) -> String {
        let table: serde_json::Map<String, Value> = self
            .values
            .iter()
            .map(|(x, f)| {
                let key = x
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                let pts: Vec<Value> = f
                    .breakpoints()
                    .iter()
                    .map(|(t, v)| json!([fmt_q(t), fmt_q(v)]))
                    .collect();
                (key, Value::Array(pts))
            })
            .collect();
        serde_json::to_string_pretty(&json!({"group": self.group.orders(), "upsilon": table}))
            .expect("json")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Obstruction {
    NotSquare {
        order: u128,
    },
    /// Every candidate subgroup has an element where the test fails.
    NoSubgroup {
        checked: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Inconclusive: the invariants vanish on this subgroup.
    PassesWith(Subgroup),
    Obstructed(Obstruction),
}

impl Verdict {
    pub fn is_obstructed(&self) -> bool {
        matches!(self, Verdict::Obstructed(_))
    }
}

fn search(
    group: &FiniteAbelianGroup,
    cap: u64,
    exec: Exec,
    ok: impl Fn(&[u64]) -> Result<bool, ConcordanceError> + Sync,
) -> Result<Verdict, ConcordanceError> {
    let subs = match square_root_subgroups(group, cap, exec)? {
        SquareRoots::NotSquare { order } => {
            return Ok(Verdict::Obstructed(Obstruction::NotSquare { order }))
        }
        SquareRoots::Subgroups(s) => s,
    };
    for s in &subs {
        let mut good = true;
        for x in s.elements() {
            if !ok(x)? {
                good = false;
                break;
            }
        }
        if good {
            return Ok(Verdict::PassesWith(s.clone()));
        }
    }
    Ok(Verdict::Obstructed(Obstruction::NoSubgroup {
        checked: subs.len(),
    }))
}

/// Looks for a subgroup of order `sqrt|H|` on which every `Υ_ξ` vanishes.
pub fn slice_obstruction(
    u: &UpsilonMap,
    cap: u64,
    exec: Exec,
) -> Result<Verdict, ConcordanceError> {
    search(u.group(), cap, exec, |x| Ok(u.get(x)?.is_zero()))
}

/// Looks for `G ≤ H1 × H2` of order `sqrt(|H1| |H2|)` with
/// `Υ1(ξ) = Υ2(ξ')` for every `(ξ, ξ') ∈ G`.
pub fn concordance_test(
    u1: &UpsilonMap,
    u2: &UpsilonMap,
    cap: u64,
    exec: Exec,
) -> Result<Verdict, ConcordanceError> {
    let k = u1.group().orders().len();
    let prod = u1.group().product(u2.group());
    search(&prod, cap, exec, |x| {
        Ok(u1.get(&x[..k])?.sub(u2.get(&x[k..])?).is_zero())
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiniteOrder {
    /// Some integer combination of the subgroup sums vanishes. `warning`
    /// is set when there are no subgroups of order `p` at all.
    Zero { warning: Option<String> },
    /// All subgroup sums share a sign; the value is the smallest `|v_H|`.
    NonzeroWitness(Q),
}

/// Sums `v_H = Σ_{ξ ∈ H} Υ_ξ(t)` over the subgroups `H` of order `p` and
/// decides whether some nontrivial nonnegative combination can vanish.
pub fn finite_order_s(u: &UpsilonMap, p: u64, t: Q) -> Result<FiniteOrder, ConcordanceError> {
    let subs = order_p_subgroups(u.group(), p);
    if subs.is_empty() {
        return Ok(FiniteOrder::Zero {
            warning: Some(format!("{} has no subgroup of order {p}", u.group())),
        });
    }
    let mut vs = Vec::new();
    for s in &subs {
        let mut v = q(0);
        for x in s.elements() {
            v += u.get(x)?.eval(t);
        }
        vs.push(v);
    }
    let pos = vs.iter().any(|v| *v > q(0));
    let neg = vs.iter().any(|v| *v < q(0));
    if vs.iter().any(|v| v.is_zero()) || (pos && neg) {
        return Ok(FiniteOrder::Zero { warning: None });
    }
    let min = vs.iter().map(|v| v.abs()).min().expect("nonempty");
    Ok(FiniteOrder::NonzeroWitness(min))
}

/// `Σ a_i |ξ_i^+| - Σ b_j |ξ_j^-|`.
pub fn independence_h(
    plus: &[i64],
    minus: &[i64],
    a: &[i64],
    b: &[i64],
) -> Result<i64, ConcordanceError> {
    if plus.len() != a.len() {
        return Err(ConcordanceError::Misaligned(a.len(), plus.len()));
    }
    if minus.len() != b.len() {
        return Err(ConcordanceError::Misaligned(b.len(), minus.len()));
    }
    let s: i64 = plus.iter().zip(a).map(|(x, c)| c * x.abs()).sum::<i64>()
        - minus.iter().zip(b).map(|(x, c)| c * x.abs()).sum::<i64>();
    Ok(s)
}

/// Why a candidate relation `Σ k_i T_{2, 2n_i + 1} = 0` fails.
#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    /// `det` of the sum is not a square.
    NotSquare { order: u128 },
    /// `τ` of the sum is nonzero, so `ξ = 0` is a witness in every
    /// metabolizer.
    Tau { tau: i64 },
    /// Every metabolizer contains some `ξ` with `H(ξ) ≠ 0`.
    Witness { metabolizers: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub coeffs: Vec<i64>,
    /// `None` means the relation survived every test.
    pub rejection: Option<Rejection>,
}

fn symmetric_abs(x: u64, p: u64) -> i64 {
    let x = x as i64;
    let p = p as i64;
    x.min(p - x)
}

/// Tests one relation. The group is one copy of `Z_{2n+1}` per summand;
/// on a copy `τ_{s0+ξ}(T_{2,2n+1}) = n - |ξ|`.
pub fn test_relation(
    ns: &[u32],
    coeffs: &[i64],
    cap: u64,
    exec: Exec,
) -> Result<RelationReport, ConcordanceError> {
    if ns.len() != coeffs.len() {
        return Err(ConcordanceError::Misaligned(ns.len(), coeffs.len()));
    }
    let mut orders = Vec::new();
    let mut sign = Vec::new();
    let mut tau = 0i64;
    for (&n, &k) in ns.iter().zip(coeffs) {
        tau += k * n as i64;
        for _ in 0..k.abs() {
            orders.push(2 * n as u64 + 1);
            sign.push(k.signum());
        }
    }
    let group = FiniteAbelianGroup::new(orders)?;
    let report = |r| RelationReport {
        coeffs: coeffs.to_vec(),
        rejection: r,
    };
    if isqrt(group.order()).is_none() {
        return Ok(report(Some(Rejection::NotSquare {
            order: group.order(),
        })));
    }
    if tau != 0 {
        return Ok(report(Some(Rejection::Tau { tau })));
    }
    let subs = match square_root_subgroups(&group, cap, exec)? {
        SquareRoots::Subgroups(s) => s,
        SquareRoots::NotSquare { order } => {
            return Ok(report(Some(Rejection::NotSquare { order })))
        }
    };
    let h = |x: &[u64]| -> i64 {
        let (mut plus, mut minus) = (Vec::new(), Vec::new());
        for ((&a, &n), &s) in x.iter().zip(group.orders()).zip(&sign) {
            if s > 0 {
                plus.push(symmetric_abs(a, n));
            } else {
                minus.push(symmetric_abs(a, n));
            }
        }
        let (a, b) = (vec![1; plus.len()], vec![1; minus.len()]);
        independence_h(&plus, &minus, &a, &b).expect("aligned")
    };
    let witnessed = exec.map(&subs, |s| s.elements().iter().any(|x| h(x) != 0));
    Ok(report(witnessed.iter().all(|&w| w).then_some(
        Rejection::Witness {
            metabolizers: subs.len(),
        },
    )))
}

/// Runs [`test_relation`] over every nonzero coefficient vector with
/// entries in `[-bound, bound]`.
pub fn independence_driver(
    ns: &[u32],
    bound: i64,
    cap: u64,
    exec: Exec,
) -> Result<Vec<RelationReport>, ConcordanceError> {
    let mut vecs: Vec<Vec<i64>> = vec![vec![]];
    for _ in ns {
        vecs = vecs
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    vecs.retain(|v| v.iter().any(|&k| k != 0));
    vecs.into_iter()
        .map(|v| test_relation(ns, &v, cap, exec))
        .collect()
}

fn squarefree_part(mut n: u64) -> u64 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    out * n
}

/// Necessary condition for `K` to be concordant to `T_{2,2n+1}`:
/// `det K > (2n+1)/4`, and `det K · (2n+1)` is a square.
pub fn torus_det_bound(n: u64, det: u64) -> bool {
    4 * det > 2 * n + 1 && squarefree_part(det) == squarefree_part(2 * n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn trefoil_poly() -> IntLaurentPoly {
        IntLaurentPoly::parse("t - 1 + t^-1").unwrap()
    }

    #[test]
    fn parse_and_print() {
        let p = trefoil_poly();
        assert_eq!(p, IntLaurentPoly::from_terms([(1, 1), (0, -1), (-1, 1)]));
        assert_eq!(p.to_string(), "t - 1 + t^-1");
        let f = IntLaurentPoly::parse("-2t + 5 - 2t^-1").unwrap();
        assert_eq!(f.coeff(1), BigInt::from(-2));
        assert_eq!(IntLaurentPoly::parse(&f.to_string()).unwrap(), f);
        assert_eq!(
            IntLaurentPoly::parse("3*t^2 - t^-2").unwrap(),
            IntLaurentPoly::from_terms([(2, 3), (-2, -1)])
        );
        assert!(IntLaurentPoly::parse("t^").is_err());
        assert!(IntLaurentPoly::parse("").is_err());
    }

    #[test]
    fn determinants() {
        let t = trefoil_poly();
        assert_eq!(det_m(&t, 2), BigUint::from(3u32));
        assert_eq!(det_m(&t, 3), BigUint::from(4u32));
        // x^6 - 1 shares the roots of t^2 - t + 1
        assert_eq!(det_m(&t, 6), BigUint::zero());
        for n in (2..=10).step_by(2) {
            let h = n / 2;
            let d = IntLaurentPoly::from_terms([(1, -h), (0, n + 1), (-1, -h)]);
            assert_eq!(det_m(&d, 2), BigUint::from(2 * n as u32 + 1));
        }
        let unknot = IntLaurentPoly::from_terms([(0, 1)]);
        assert_eq!(det_m(&unknot, 5), BigUint::one());
    }

    #[test]
    fn sqrt_subgroups_examples() {
        let z9 = FiniteAbelianGroup::cyclic(9).unwrap();
        let SquareRoots::Subgroups(s) =
            square_root_subgroups(&z9, DEFAULT_CAP, Exec::Sequential).unwrap()
        else {
            panic!()
        };
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].elements(), &[vec![0], vec![3], vec![6]]);
        let z33 = FiniteAbelianGroup::new(vec![3, 3]).unwrap();
        let SquareRoots::Subgroups(s) =
            square_root_subgroups(&z33, DEFAULT_CAP, Exec::Sequential).unwrap()
        else {
            panic!()
        };
        assert_eq!(s.len(), 4);
        assert_eq!(
            square_root_subgroups(
                &FiniteAbelianGroup::cyclic(3).unwrap(),
                DEFAULT_CAP,
                Exec::Sequential
            )
            .unwrap(),
            SquareRoots::NotSquare { order: 3 }
        );
    }

    /// Brute force: every subset closed under addition containing 0.
    fn brute_subgroups(g: &FiniteAbelianGroup, order: usize) -> BTreeSet<Subgroup> {
        let els = g.elements();
        let mut out = BTreeSet::new();
        for x in &els {
            for y in &els {
                // all subgroups of these small groups are 2-generated
                let mut s: BTreeSet<Vec<u64>> = BTreeSet::from([g.zero()]);
                loop {
                    let mut next = s.clone();
                    for a in &s {
                        next.insert(g.add(a, x));
                        next.insert(g.add(a, y));
                    }
                    if next == s {
                        break;
                    }
                    s = next;
                }
                if s.len() == order {
                    out.insert(Subgroup {
                        elements: s.into_iter().collect(),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn sqrt_subgroups_match_brute_force() {
        for orders in [
            vec![4, 4],
            vec![2, 8],
            vec![36],
            vec![6, 6],
            vec![3, 12],
            vec![2, 2, 4],
        ] {
            let g = FiniteAbelianGroup::new(orders).unwrap();
            let SquareRoots::Subgroups(fast) =
                square_root_subgroups(&g, DEFAULT_CAP, Exec::Parallel).unwrap()
            else {
                panic!()
            };
            let root = isqrt(g.order()).unwrap() as usize;
            let fast: BTreeSet<Subgroup> = fast.into_iter().collect();
            if g.orders().len() <= 2 {
                assert_eq!(fast, brute_subgroups(&g, root), "{g}");
            }
            for s in &fast {
                assert_eq!(s.order(), root);
                assert!(s.is_closed_under_negation(&g));
            }
        }
    }

    #[test]
    fn caps() {
        let g = FiniteAbelianGroup::new(vec![3; 10]).unwrap();
        assert!(matches!(
            square_root_subgroups(&g, DEFAULT_CAP, Exec::Sequential),
            Err(ConcordanceError::CapExceeded { .. })
        ));
    }

    fn torus_map(p: i64) -> UpsilonMap {
        let n = (p - 1) / 2;
        let labeled: Vec<_> = (-n..=n)
            .map(|h| (h, PiecewiseLinear::tent(q(h.abs() - n))))
            .collect();
        UpsilonMap::cyclic(p as u64, &labeled).unwrap()
    }

    #[test]
    fn slice_tests() {
        let unknot = UpsilonMap::cyclic(1, &[(0, PiecewiseLinear::zero())]).unwrap();
        assert!(matches!(
            slice_obstruction(&unknot, DEFAULT_CAP, Exec::Sequential).unwrap(),
            Verdict::PassesWith(s) if s.order() == 1
        ));
        assert_eq!(
            slice_obstruction(&torus_map(5), DEFAULT_CAP, Exec::Sequential).unwrap(),
            Verdict::Obstructed(Obstruction::NotSquare { order: 5 })
        );
        // T_{2,9}: the order 3 subgroup has nonzero Υ at 0
        assert!(
            slice_obstruction(&torus_map(9), DEFAULT_CAP, Exec::Sequential)
                .unwrap()
                .is_obstructed()
        );
    }

    #[test]
    fn concordance_tests() {
        let t9 = torus_map(9);
        match concordance_test(&t9, &t9, DEFAULT_CAP, Exec::Sequential).unwrap() {
            Verdict::PassesWith(s) => assert!(s.elements().iter().all(|x| {
                let (a, b) = (x[0] as i64, x[1] as i64);
                a == b || a == (9 - b) % 9
            })),
            v => panic!("{v:?}"),
        }
        let unknot = UpsilonMap::cyclic(1, &[(0, PiecewiseLinear::zero())]).unwrap();
        assert_eq!(
            concordance_test(&torus_map(5), &unknot, DEFAULT_CAP, Exec::Sequential).unwrap(),
            Verdict::Obstructed(Obstruction::NotSquare { order: 5 })
        );
        let mut vals = t9.values().clone();
        let bumped = PiecewiseLinear::tent(frac(-5, 2));
        vals.insert(vec![1], bumped.clone());
        vals.insert(vec![8], bumped);
        let perturbed = UpsilonMap::new(t9.group().clone(), vals).unwrap();
        assert!(
            concordance_test(&t9, &perturbed, DEFAULT_CAP, Exec::Sequential)
                .unwrap()
                .is_obstructed()
        );
    }

    #[test]
    fn symmetry_enforced() {
        let g = FiniteAbelianGroup::cyclic(5).unwrap();
        let vals = BTreeMap::from([
            (vec![1], PiecewiseLinear::tent(q(-1))),
            (vec![4], PiecewiseLinear::tent(q(-2))),
        ]);
        assert_eq!(
            UpsilonMap::new(g.clone(), vals),
            Err(ConcordanceError::Asymmetric(vec![1]))
        );
        let m =
            UpsilonMap::new(g, BTreeMap::from([(vec![2], PiecewiseLinear::tent(q(3)))])).unwrap();
        assert_eq!(m.get(&[3]).unwrap(), &PiecewiseLinear::tent(q(3)));
    }

    #[test]
    fn json_round_trip() {
        let m = torus_map(5);
        let back = UpsilonMap::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let raw =
            r#"{"group":[3],"upsilon":{"0":[[0,0],[1,-1],[2,0]],"[1]":[["0","0"],["2","0"]]}}"#;
        let m = UpsilonMap::from_json(raw).unwrap();
        assert!(m.is_total());
        assert!(m.get(&[2]).unwrap().is_zero());
    }

    #[test]
    fn finite_order() {
        let g = FiniteAbelianGroup::new(vec![3, 3]).unwrap();
        let zero: BTreeMap<_, _> = g
            .elements()
            .into_iter()
            .map(|x| (x, PiecewiseLinear::zero()))
            .collect();
        let m = UpsilonMap::new(g.clone(), zero.clone()).unwrap();
        assert_eq!(
            finite_order_s(&m, 3, q(1)).unwrap(),
            FiniteOrder::Zero { warning: None }
        );
        // Υ = -1/2 at t = 1 everywhere: each line sums to -3/2
        let half: BTreeMap<_, _> = g
            .elements()
            .into_iter()
            .map(|x| (x, PiecewiseLinear::tent(frac(-1, 2))))
            .collect();
        let m = UpsilonMap::new(g.clone(), half).unwrap();
        assert_eq!(
            finite_order_s(&m, 3, q(1)).unwrap(),
            FiniteOrder::NonzeroWitness(frac(3, 2))
        );
        let mut mixed = zero;
        mixed.insert(vec![1, 0], PiecewiseLinear::tent(q(1)));
        mixed.insert(vec![2, 0], PiecewiseLinear::tent(q(1)));
        mixed.insert(vec![0, 1], PiecewiseLinear::tent(q(-1)));
        mixed.insert(vec![0, 2], PiecewiseLinear::tent(q(-1)));
        let m = UpsilonMap::new(g, mixed).unwrap();
        assert_eq!(
            finite_order_s(&m, 3, q(1)).unwrap(),
            FiniteOrder::Zero { warning: None }
        );
        assert!(matches!(
            finite_order_s(&torus_map(5), 3, q(1)).unwrap(),
            FiniteOrder::Zero { warning: Some(_) }
        ));
    }

    #[test]
    fn h_values() {
        assert_eq!(independence_h(&[0], &[0], &[1], &[1]), Ok(0));
        assert_eq!(independence_h(&[1], &[0], &[1], &[1]), Ok(1));
        assert_eq!(independence_h(&[-2, 1], &[3], &[1, 2], &[1]), Ok(1));
        assert!(independence_h(&[1], &[], &[1, 1], &[]).is_err());
    }

    #[test]
    fn one_relation() {
        let r = test_relation(&[1, 2, 3], &[2, 2, -2], DEFAULT_CAP, Exec::Parallel).unwrap();
        assert_eq!(r.rejection, Some(Rejection::Witness { metabolizers: 192 }));
        let r = test_relation(&[1, 2, 3], &[1, 0, 0], DEFAULT_CAP, Exec::Parallel).unwrap();
        assert_eq!(r.rejection, Some(Rejection::NotSquare { order: 3 }));
        let r = test_relation(&[1, 2, 3], &[2, 0, 0], DEFAULT_CAP, Exec::Parallel).unwrap();
        assert_eq!(r.rejection, Some(Rejection::Tau { tau: 2 }));
    }

    #[test]
    fn det_bounds() {
        assert!(!torus_det_bound(4, 1));
        assert!(torus_det_bound(1, 3));
        assert!(!torus_det_bound(12, 5));
        assert!(torus_det_bound(4, 9));
        assert!(!torus_det_bound(2, 3));
    }

    #[test]
    fn alexander_of_trefoil() {
        let k = crate::complex::staircase(&[(1, 1)], 1, q(0));
        assert_eq!(alexander_polynomial(&k).unwrap(), trefoil_poly());
    }

    #[test]
    fn upsilon_adds_over_twisted_sums() {
        use crate::complex::thin_model;
        use crate::grid::{build_torus_grid, spinc_slice};
        use crate::upsilon::upsilon_function;
        for p in [3i64, 5] {
            let grid = build_torus_grid(p).unwrap();
            let n = (p - 1) / 2;
            // grid slices carry a doubling factor; tensor their halved models
            let raw: Vec<_> = (-n..=n).map(|h| spinc_slice(&grid, h).unwrap()).collect();
            let ups: Vec<_> = raw.iter().map(|s| upsilon_function(s).unwrap()).collect();
            let slices: Vec<_> = raw
                .iter()
                .zip(-n..=n)
                .map(|(s, h)| thin_model(s).unwrap().with_spinc(Some(h)))
                .collect();
            for (s, u) in slices.iter().zip(&ups) {
                assert_eq!(&upsilon_function(s).unwrap(), u);
            }
            for (i, a) in slices.iter().enumerate() {
                for (j, b) in slices.iter().enumerate().skip(i) {
                    let t = a.tensor(b).unwrap();
                    let label = t.generators()[0].spinc;
                    assert_eq!(label, Some(i as i64 + j as i64 - 2 * n));
                    assert_eq!(
                        upsilon_function(&t).unwrap(),
                        ups[i].add(&ups[j]),
                        "p={p} {i} {j}"
                    );
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn det2_is_value_at_minus_one(cs in proptest::collection::vec(-6i64..=6, 0..4)) {
                // symmetric with Δ(1) = 1
                let s: i64 = cs.iter().sum();
                let mid = 1 - 2 * s;
                let mut terms = vec![(0, mid)];
                for (i, &c) in cs.iter().enumerate() {
                    terms.push((i as i64 + 1, c));
                    terms.push((-(i as i64) - 1, c));
                }
                let p = IntLaurentPoly::from_terms(terms);
                prop_assert!(p.check_knot().is_ok());
                let direct = (p.eval_sign(true) * p.eval_sign(false)).magnitude().clone();
                prop_assert_eq!(det_m(&p, 2), direct);
            }
        }
    }
}
