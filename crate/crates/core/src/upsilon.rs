//! Region invariants `Υ^C`, the piecewise-linear `Υ_t` and `τ`.

use crate::complex::{correction_term, ComplexError, GradingSlice, KnotComplex};
use crate::exec::Exec;
use crate::rational::{fmt_q, parse_q, q, Q};
use crate::regions::{halfplane_t, SouthWestRegion};
use num_traits::Zero;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlError {
    #[error("breakpoints must start at t = 0 and end at t = 2")]
    Span,
    #[error("breakpoints must be strictly increasing")]
    NotIncreasing,
    #[error("cannot parse breakpoint data: {0}")]
    Parse(String),
}

/// Continuous function on `[0, 2]`, affine between breakpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiecewiseLinear {
    points: Vec<(Q, Q)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(Q, Q)>) -> Result<Self, PlError> {
        if points.first().map(|p| p.0) != Some(Q::zero())
            || points.last().map(|p| p.0) != Some(q(2))
        {
            return Err(PlError::Span);
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(PlError::NotIncreasing);
        }
        Ok(PiecewiseLinear { points }.merged())
    }

    pub fn zero() -> Self {
        PiecewiseLinear {
            points: vec![(q(0), q(0)), (q(2), q(0))],
        }
    }

    /// `c * (1 - |t - 1|)`.
    pub fn tent(c: Q) -> Self {
        PiecewiseLinear::new(vec![(q(0), q(0)), (q(1), c), (q(2), q(0))]).expect("tent")
    }

    pub fn breakpoints(&self) -> &[(Q, Q)] {
        &self.points
    }

    pub fn eval(&self, t: Q) -> Q {
        let i = self.points.partition_point(|p| p.0 < t);
        if i < self.points.len() && self.points[i].0 == t {
            return self.points[i].1;
        }
        let i = i.clamp(1, self.points.len() - 1);
        let (t0, v0) = self.points[i - 1];
        let (t1, v1) = self.points[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    fn combine(&self, other: &Self, f: impl Fn(Q, Q) -> Q) -> Self {
        let ts: BTreeSet<Q> = self
            .points
            .iter()
            .chain(&other.points)
            .map(|p| p.0)
            .collect();
        PiecewiseLinear {
            points: ts
                .into_iter()
                .map(|t| (t, f(self.eval(t), other.eval(t))))
                .collect(),
        }
        .merged()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        PiecewiseLinear {
            points: self.points.iter().map(|&(t, v)| (t, -v)).collect(),
        }
    }

    pub fn scale(&self, c: Q) -> Self {
        PiecewiseLinear {
            points: self.points.iter().map(|&(t, v)| (t, c * v)).collect(),
        }
        .merged()
    }

    pub fn is_zero(&self) -> bool {
        self.points.iter().all(|p| p.1.is_zero())
    }

    /// Slope of the first segment.
    pub fn initial_slope(&self) -> Q {
        let (t0, v0) = self.points[0];
        let (t1, v1) = self.points[1];
        (v1 - v0) / (t1 - t0)
    }

    /// Drops breakpoints interior to a straight segment.
    fn merged(mut self) -> Self {
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(self.points.len());
        for p in self.points.drain(..) {
            while out.len() >= 2 {
                let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
                if (b.1 - a.1) * (p.0 - b.0) == (p.1 - b.1) * (b.0 - a.0) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        PiecewiseLinear { points: out }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "value"]).expect("in-memory write");
        for (t, v) in &self.points {
            w.write_record([fmt_q(t), fmt_q(v)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn from_csv(s: &str) -> Result<Self, PlError> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let mut points = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| PlError::Parse(e.to_string()))?;
            if rec.len() != 2 {
                return Err(PlError::Parse(format!(
                    "expected 2 columns, got {}",
                    rec.len()
                )));
            }
            let t = parse_q(&rec[0]).map_err(PlError::Parse)?;
            let v = parse_q(&rec[1]).map_err(PlError::Parse)?;
            points.push((t, v));
        }
        PiecewiseLinear::new(points)
    }
}

impl std::fmt::Display for PiecewiseLinear {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .points
            .iter()
            .map(|(t, v)| format!("({t}, {v})"))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub fn upsilon_region(k: &KnotComplex, c: &SouthWestRegion) -> Result<Q, ComplexError> {
    let s = GradingSlice::new(k, correction_term(k)?);
    s.minmax_by(|a, j| c.entry_time(q(a), q(j)))
}

/// Exhaustive version of [`upsilon_region`], for small boundary spaces.
pub fn upsilon_oracle(k: &KnotComplex, c: &SouthWestRegion) -> Result<Q, ComplexError> {
    crate::complex::coset_oracle(k, |a, j| c.entry_time(q(a), q(j)))
}

fn ht_value(s: &GradingSlice, t: Q) -> Result<Q, ComplexError> {
    let h = halfplane_t(t).expect("t in range");
    Ok(q(-2) * s.minmax_by(|a, j| h.entry_time(q(a), q(j)))?)
}

/// `Υ_t` at a single `t`.
pub fn upsilon_at(k: &KnotComplex, t: Q) -> Result<Q, ComplexError> {
    ht_value(&GradingSlice::new(k, correction_term(k)?), t)
}

/// Values of `t` in `(0, 2)` where two term lines
/// `t ↦ (t/2)·A + (1 - t/2)·j` cross.
fn crossing_times(positions: impl Iterator<Item = (i64, i64)>) -> Vec<Q> {
    let lines: BTreeSet<(i64, i64)> = positions.map(|(a, j)| (a - j, j)).collect();
    let lines: Vec<_> = lines.into_iter().collect();
    let mut ts = BTreeSet::from([q(0), q(2)]);
    for (i, &(s1, j1)) in lines.iter().enumerate() {
        for &(s2, j2) in &lines[i + 1..] {
            if s1 != s2 {
                let t = Q::new(2 * (j2 - j1), s1 - s2);
                if t > q(0) && t < q(2) {
                    ts.insert(t);
                }
            }
        }
    }
    ts.into_iter().collect()
}

pub fn upsilon_function_with(k: &KnotComplex, exec: Exec) -> Result<PiecewiseLinear, ComplexError> {
    let s = GradingSlice::new(k, correction_term(k)?);
    let ts = crossing_times(s.positions().iter().chain(s.upper_positions()).copied());
    let vals = exec.map(&ts, |&t| ht_value(&s, t));
    let points = ts
        .iter()
        .zip(vals)
        .map(|(&t, v)| v.map(|v| (t, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PiecewiseLinear::new(points).expect("span [0, 2]"))
}

pub fn upsilon_function(k: &KnotComplex) -> Result<PiecewiseLinear, ComplexError> {
    upsilon_function_with(k, Exec::default())
}

/// `τ` as minus the initial slope of `Υ`.
pub fn tau(k: &KnotComplex) -> Result<Q, ComplexError> {
    Ok(-upsilon_function(k)?.initial_slope())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{acyclic_box, staircase};
    use crate::rational::frac;
    use proptest::prelude::*;

    fn trefoil() -> KnotComplex {
        staircase(&[(1, 1)], 1, q(0))
    }

    fn figure8() -> KnotComplex {
        KnotComplex::unknot().direct_sum(&acyclic_box("b", 0, q(0), None))
    }

    #[test]
    fn region_values() {
        let t = trefoil();
        assert_eq!(
            upsilon_region(&t, &halfplane_t(q(1)).unwrap()),
            Ok(frac(1, 2))
        );
        assert_eq!(upsilon_region(&t, &halfplane_t(q(0)).unwrap()), Ok(q(0)));
        for k in 0..=4 {
            let h = halfplane_t(frac(k, 2)).unwrap();
            assert_eq!(upsilon_region(&KnotComplex::unknot(), &h), Ok(q(0)));
            assert_eq!(upsilon_oracle(&t, &h), upsilon_region(&t, &h));
            assert_eq!(upsilon_oracle(&figure8(), &h), Ok(q(0)));
        }
    }

    #[test]
    fn functions() {
        let t = trefoil();
        assert_eq!(upsilon_function(&t).unwrap(), PiecewiseLinear::tent(q(-1)));
        assert_eq!(
            upsilon_function(&KnotComplex::unknot()).unwrap(),
            PiecewiseLinear::zero()
        );
        let tt = t.tensor(&t).unwrap();
        assert_eq!(upsilon_function(&tt).unwrap(), PiecewiseLinear::tent(q(-2)));
        assert_eq!(
            upsilon_function(&t.dual()).unwrap(),
            PiecewiseLinear::tent(q(1))
        );
        assert!(upsilon_function(&t.tensor(&t.dual()).unwrap())
            .unwrap()
            .is_zero());
        assert_eq!(tau(&t), Ok(q(1)));
        assert_eq!(tau(&KnotComplex::unknot()), Ok(q(0)));
    }

    #[test]
    fn policies_agree() {
        let k = staircase(&[(1, 2), (3, 1)], 0, q(0));
        assert_eq!(
            upsilon_function_with(&k, Exec::Sequential),
            upsilon_function_with(&k, Exec::Parallel)
        );
    }

    #[test]
    fn non_tent_shape() {
        // T(3,4) staircase 1,2,2,1
        let k = staircase(&[(2, 1), (1, 2)], 3, q(0));
        let u = upsilon_function(&k).unwrap();
        assert_eq!(u.eval(q(1)), q(-2));
        assert_eq!(u.eval(frac(2, 3)), q(-2));
        assert_eq!(tau(&k), Ok(q(3)));
    }

    #[test]
    fn pl_algebra_and_csv() {
        let a = PiecewiseLinear::tent(q(-1));
        let b = PiecewiseLinear::new(vec![(q(0), q(0)), (frac(1, 2), q(1)), (q(2), q(1))]).unwrap();
        let s = a.add(&b);
        assert_eq!(s.eval(frac(1, 2)), frac(1, 2));
        assert_eq!(s.sub(&b), a);
        assert!(a.add(&a.neg()).is_zero());
        let csv = a.to_csv();
        assert_eq!(csv, "t,value\n0,0\n1,-1\n2,0\n");
        assert_eq!(PiecewiseLinear::from_csv(&csv).unwrap(), a);
        assert_eq!(
            PiecewiseLinear::new(vec![(q(0), q(0)), (q(1), q(1))]),
            Err(PlError::Span)
        );
        let collinear =
            PiecewiseLinear::new(vec![(q(0), q(0)), (q(1), q(1)), (q(2), q(2))]).unwrap();
        assert_eq!(collinear.breakpoints().len(), 2);
    }

    proptest! {
        #[test]
        fn eval_between_breakpoints(vals in proptest::collection::vec(-20i64..20, 3)) {
            let f = PiecewiseLinear::new(vec![
                (q(0), q(vals[0])), (q(1), q(vals[1])), (q(2), q(vals[2]))]).unwrap();
            let mid = f.eval(frac(1, 2));
            prop_assert_eq!(mid * 2, q(vals[0]) + q(vals[1]));
        }
    }
}
