//! South-west regions: finite unions of intersections of half-planes
//! `a*x + b*y <= c` with `a, b >= 0`.

use crate::rational::{self, q, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("t = {0} is outside [0, 2]")]
    OutOfRange(Q),
    #[error("half-plane needs a, b >= 0 and a + b > 0")]
    NotSouthWest,
    #[error("region has no pieces")]
    Empty,
    #[error("cannot parse region: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfPlane {
    #[serde(with = "rational::as_string")]
    pub a: Q,
    #[serde(with = "rational::as_string")]
    pub b: Q,
    #[serde(with = "rational::as_string")]
    pub c: Q,
}

impl HalfPlane {
    pub fn new(a: Q, b: Q, c: Q) -> Result<Self, RegionError> {
        if a.is_negative() || b.is_negative() || (a + b).is_zero() {
            return Err(RegionError::NotSouthWest);
        }
        Ok(HalfPlane { a, b, c })
    }

    /// Smallest `s` with `(x - s, y - s)` inside.
    pub fn entry(&self, x: Q, y: Q) -> Q {
        (self.a * x + self.b * y - self.c) / (self.a + self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SouthWestRegion {
    pub pieces: Vec<Vec<HalfPlane>>,
}

impl SouthWestRegion {
    pub fn new(pieces: Vec<Vec<HalfPlane>>) -> Result<Self, RegionError> {
        if pieces.is_empty() || pieces.iter().any(|p| p.is_empty()) {
            return Err(RegionError::Empty);
        }
        Ok(SouthWestRegion { pieces })
    }

    pub fn entry_time(&self, x: Q, y: Q) -> Q {
        self.pieces
            .iter()
            .map(|piece| {
                piece
                    .iter()
                    .map(|h| h.entry(x, y))
                    .max()
                    .expect("nonempty piece")
            })
            .min()
            .expect("nonempty region")
    }

    pub fn contains(&self, x: Q, y: Q) -> bool {
        self.entry_time(x, y) <= Q::zero()
    }

    pub fn is_normalized(&self) -> bool {
        self.entry_time(Q::zero(), Q::zero()).is_zero()
    }

    /// The region moved by `(dx, dy)`.
    pub fn translate(&self, dx: Q, dy: Q) -> Self {
        SouthWestRegion {
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|h| HalfPlane {
                            c: h.c + h.a * dx + h.b * dy,
                            ..*h
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        SouthWestRegion { pieces }
    }

    /// Parses `ht:<t>` or region JSON.
    pub fn parse(s: &str) -> Result<Self, RegionError> {
        if let Some(t) = s.strip_prefix("ht:") {
            let t = rational::parse_q(t).map_err(RegionError::Parse)?;
            return halfplane_t(t);
        }
        let r: SouthWestRegion =
            serde_json::from_str(s).map_err(|e| RegionError::Parse(e.to_string()))?;
        for h in r.pieces.iter().flatten() {
            HalfPlane::new(h.a, h.b, h.c)?;
        }
        SouthWestRegion::new(r.pieces)
    }
}

/// `H_t = { t*x + (2-t)*y <= 0 }`; at `t = 2` this is `x <= 0`.
pub fn halfplane_t(t: Q) -> Result<SouthWestRegion, RegionError> {
    if t < Q::zero() || t > q(2) {
        return Err(RegionError::OutOfRange(t));
    }
    let h = if t == q(2) {
        HalfPlane::new(q(1), Q::zero(), Q::zero())?
    } else if t.is_zero() {
        HalfPlane::new(Q::zero(), q(1), Q::zero())?
    } else {
        HalfPlane::new(t, q(2) - t, Q::zero())?
    };
    SouthWestRegion::new(vec![vec![h]])
}

/// Quadrant `{x <= cx, y <= cy}`.
pub fn quadrant(cx: Q, cy: Q) -> SouthWestRegion {
    SouthWestRegion {
        pieces: vec![vec![
            HalfPlane {
                a: q(1),
                b: Q::zero(),
                c: cx,
            },
            HalfPlane {
                a: Q::zero(),
                b: q(1),
                c: cy,
            },
        ]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use proptest::prelude::*;

    #[test]
    fn halfplane_family() {
        let h0 = halfplane_t(q(0)).unwrap();
        assert_eq!(h0.entry_time(q(5), q(-1)), q(-1));
        let h1 = halfplane_t(q(1)).unwrap();
        assert_eq!(h1.entry_time(q(1), q(0)), frac(1, 2));
        let h2 = halfplane_t(q(2)).unwrap();
        assert_eq!(h2.entry_time(q(-3), q(7)), q(-3));
        assert!(halfplane_t(q(3)).is_err());
    }

    #[test]
    fn entry_matches_convex_combination() {
        for k in 0..=8 {
            let t = frac(k, 4);
            let h = halfplane_t(t).unwrap();
            let (a, j) = (q(3), q(-2));
            assert_eq!(h.entry_time(a, j), t / 2 * a + (q(1) - t / 2) * j);
        }
    }

    #[test]
    fn unions_take_minimum() {
        let c = halfplane_t(q(2))
            .unwrap()
            .union(&halfplane_t(q(0)).unwrap());
        assert_eq!(c.entry_time(q(3), q(-5)), q(-5));
        assert!(c.is_normalized());
    }

    #[test]
    fn normalization() {
        assert!(halfplane_t(frac(1, 3)).unwrap().is_normalized());
        let moved = halfplane_t(q(1)).unwrap().translate(q(0), q(1));
        assert!(!moved.is_normalized());
        assert!(quadrant(q(0), q(0)).is_normalized());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(
            SouthWestRegion::parse("ht:1").unwrap(),
            halfplane_t(q(1)).unwrap()
        );
        let js = r#"{"pieces":[[{"a":"1","b":"0","c":"0"},{"a":"0","b":"1","c":"1/2"}]]}"#;
        let r = SouthWestRegion::parse(js).unwrap();
        assert_eq!(r.entry_time(q(0), q(1)), frac(1, 2));
        assert!(SouthWestRegion::parse(r#"{"pieces":[[{"a":"-1","b":"0","c":"0"}]]}"#).is_err());
    }

    fn arb_q() -> impl Strategy<Value = Q> {
        (-40i64..40, 1i64..6).prop_map(|(n, d)| frac(n, d))
    }

    fn arb_region() -> impl Strategy<Value = SouthWestRegion> {
        let hp = (0i64..4, 0i64..4, -3i64..3)
            .prop_filter("a+b>0", |(a, b, _)| a + b > 0)
            .prop_map(|(a, b, c)| HalfPlane::new(q(a), q(b), q(c)).unwrap());
        proptest::collection::vec(proptest::collection::vec(hp, 1..3), 1..3)
            .prop_map(|p| SouthWestRegion::new(p).unwrap())
    }

    proptest! {
        #[test]
        fn diagonal_equivariance(r in arb_region(), x in arb_q(), y in arb_q(), s in arb_q()) {
            prop_assert_eq!(r.entry_time(x + s, y + s), r.entry_time(x, y) + s);
        }

        #[test]
        fn membership_duality(r in arb_region(), x in arb_q(), y in arb_q(), s in arb_q()) {
            let inside = r.contains(x - s, y - s);
            prop_assert_eq!(inside, r.entry_time(x, y) <= s);
        }

        #[test]
        fn monotone(r in arb_region(), x in arb_q(), y in arb_q(), d in 0i64..5) {
            let e = r.entry_time(x, y);
            prop_assert!(r.entry_time(x + q(d), y) >= e);
            prop_assert!(r.entry_time(x, y + q(d)) >= e);
        }
    }
}
