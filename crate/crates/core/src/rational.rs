//! Exact rationals and their `"p/q"` string form.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use std::str::FromStr;

pub type Q = Ratio<i64>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Parses `"p/q"` or a plain integer.
pub fn parse_q(s: &str) -> Result<Q, String> {
    Q::from_str(s.trim()).map_err(|e| format!("bad rational {s:?}: {e}"))
}

pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Representative of `x mod 2` in `[0, 2)`.
pub fn mod2(x: Q) -> Q {
    let two = q(2);
    let k = (x / two).floor();
    x - k * two
}

/// `Some(k)` when `(a - b) / 2` is an integer.
pub fn half_int_diff(a: Q, b: Q) -> Option<i64> {
    let h = (a - b) / q(2);
    h.is_integer().then(|| h.to_integer())
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

/// Serde adapter writing a rational as a string.
pub mod as_string {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => parse_q(&s).map_err(serde::de::Error::custom),
            Raw::I(i) => Ok(q(i)),
        }
    }
}

pub mod opt_string {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&fmt_q(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| parse_q(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub fn lcm_all(xs: impl IntoIterator<Item = i64>) -> i64 {
    xs.into_iter().fold(1, |a, b| a.lcm(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_q("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_q("-4").unwrap(), q(-4));
        assert_eq!(fmt_q(&frac(-3, 4)), "-3/4");
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn parity_classes() {
        assert_eq!(mod2(q(-3)), q(1));
        assert_eq!(mod2(frac(7, 2)), frac(3, 2));
        assert_eq!(half_int_diff(q(3), q(-1)), Some(2));
        assert_eq!(half_int_diff(q(3), q(0)), None);
    }
}
