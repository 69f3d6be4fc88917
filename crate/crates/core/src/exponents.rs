//! Extended Lebesgue exponents in `[1, inf]` and Young triples.
//!
//! An exponent is stored through its reciprocal `1/p` in `[0, 1]`, with the
//! infinite exponent kept as its own variant. Every formula downstream is
//! written in reciprocal space, so the endpoints `p = 1` and `p = inf` are
//! exact and never touch a large float.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HeatError, Result};
use crate::format::fmt_g17;

/// Tolerance for comparing derived exponents in reciprocal space.
pub const EXPONENT_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    /// `recip = 1/p`, always in `(0, 1]`.
    Finite {
        recip: f64,
    },
    Infinity,
}

/// A Lebesgue exponent `p` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(Repr);

impl Exponent {
    pub const ONE: Exponent = Exponent(Repr::Finite { recip: 1.0 });
    pub const TWO: Exponent = Exponent(Repr::Finite { recip: 0.5 });
    pub const INFINITY: Exponent = Exponent(Repr::Infinity);

    /// A finite exponent `p >= 1`. Passing `f64::INFINITY` yields the infinite exponent.
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(HeatError::InvalidExponent(p.to_string()));
        }
        if p.is_infinite() {
            return Ok(Self::INFINITY);
        }
        Ok(Exponent(Repr::Finite { recip: 1.0 / p }))
    }

    /// Build from `1/p`. Values within [`EXPONENT_TOL`] of an endpoint snap to it.
    pub fn from_reciprocal(recip: f64) -> Result<Self> {
        if !(-EXPONENT_TOL..=1.0 + EXPONENT_TOL).contains(&recip) {
            return Err(HeatError::InvalidExponent(format!("1/{recip}")));
        }
        if recip <= EXPONENT_TOL {
            return Ok(Self::INFINITY);
        }
        Ok(Exponent(Repr::Finite { recip: recip.min(1.0) }))
    }

    /// The exact ratio `num/den` (e.g. `4/3`), parsed without rounding `p` first.
    pub fn ratio(num: f64, den: f64) -> Result<Self> {
        if !(num.is_finite() && den.is_finite()) || den <= 0.0 || num < den {
            return Err(HeatError::InvalidExponent(format!("{num}/{den}")));
        }
        Ok(Exponent(Repr::Finite { recip: den / num }))
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(self) -> f64 {
        match self.0 {
            Repr::Finite { recip } => recip,
            Repr::Infinity => 0.0,
        }
    }

    /// `1 - 1/p`, the reciprocal of the conjugate exponent.
    pub fn co_reciprocal(self) -> f64 {
        1.0 - self.reciprocal()
    }

    /// The value of `p`, `f64::INFINITY` for the infinite exponent.
    pub fn value(self) -> f64 {
        match self.0 {
            Repr::Finite { recip } => 1.0 / recip,
            Repr::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self.0, Repr::Infinity)
    }

    pub fn is_one(self) -> bool {
        matches!(self.0, Repr::Finite { recip } if recip == 1.0)
    }

    /// True for `1 < p < inf`.
    pub fn is_interior(self) -> bool {
        !self.is_one() && !self.is_infinite()
    }

    /// The conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Self {
        match self.0 {
            Repr::Infinity => Self::ONE,
            Repr::Finite { recip } => {
                let c = 1.0 - recip;
                if c <= EXPONENT_TOL {
                    Self::INFINITY
                } else {
                    Exponent(Repr::Finite { recip: c })
                }
            }
        }
    }

    /// Equality of reciprocals within [`EXPONENT_TOL`].
    pub fn approx_eq(self, other: Exponent) -> bool {
        match (self.0, other.0) {
            (Repr::Infinity, Repr::Infinity) => true,
            (Repr::Finite { recip: a }, Repr::Finite { recip: b }) => (a - b).abs() <= EXPONENT_TOL,
            _ => false,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Infinity => f.write_str("inf"),
            Repr::Finite { recip } => f.write_str(&fmt_g17(1.0 / recip)),
        }
    }
}

impl FromStr for Exponent {
    type Err = HeatError;

    /// Accepts `inf`/`infinity`/`∞`, fractions `a/b`, and decimals.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || HeatError::ExponentParse(s.to_string());
        match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "∞" => return Ok(Self::INFINITY),
            _ => {}
        }
        if let Some((num, den)) = t.split_once('/') {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            return Self::ratio(num, den);
        }
        let v: f64 = t.parse().map_err(|_| bad())?;
        Self::finite(v)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;
        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an exponent such as 2, \"4/3\" or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::finite(v).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                Exponent::finite(v as f64).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                Exponent::finite(v as f64).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(ExpVisitor)
    }
}

/// Exponents `(p, q, r)` with `1/p + 1/q = 1 + 1/r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoungTriple {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
}

impl YoungTriple {
    /// Validate a fully specified triple.
    pub fn new(p: Exponent, q: Exponent, r: Exponent) -> Result<Self> {
        let gap = p.reciprocal() + q.reciprocal() - 1.0 - r.reciprocal();
        let r_dominates =
            r.reciprocal() <= p.reciprocal() + EXPONENT_TOL && r.reciprocal() <= q.reciprocal() + EXPONENT_TOL;
        if gap.abs() > EXPONENT_TOL || !r_dominates {
            return Err(HeatError::InvalidTriple {
                p: p.to_string(),
                q: q.to_string(),
            });
        }
        Ok(YoungTriple { p, q, r })
    }
}

/// The unique `r` completing `(p, q)` to a Young triple.
pub fn young_r(p: Exponent, q: Exponent) -> Result<YoungTriple> {
    let s = p.reciprocal() + q.reciprocal() - 1.0;
    if s < -EXPONENT_TOL {
        return Err(HeatError::InvalidTriple {
            p: p.to_string(),
            q: q.to_string(),
        });
    }
    // Endpoint pairs land exactly on r = p or r = q.
    let r = if q.is_one() {
        p
    } else if p.is_one() {
        q
    } else {
        Exponent::from_reciprocal(s.max(0.0))?
    };
    Ok(YoungTriple { p, q, r })
}

/// The exponent sample grid `{1, 5/4, 4/3, 3/2, 2, 3, 4, inf}` used by the verification matrix.
pub fn sample_grid() -> Vec<Exponent> {
    vec![
        Exponent::ONE,
        Exponent::ratio(5.0, 4.0).unwrap(),
        Exponent::ratio(4.0, 3.0).unwrap(),
        Exponent::ratio(3.0, 2.0).unwrap(),
        Exponent::TWO,
        Exponent::finite(3.0).unwrap(),
        Exponent::finite(4.0).unwrap(),
        Exponent::INFINITY,
    ]
}

/// All admissible `(p, q)` pairs drawn from [`sample_grid`].
pub fn admissible_pairs() -> Vec<(Exponent, Exponent)> {
    let grid = sample_grid();
    let mut out = Vec::new();
    for &p in &grid {
        for &q in &grid {
            if young_r(p, q).is_ok() {
                out.push((p, q));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(Exponent::ONE.conjugate(), Exponent::INFINITY);
        assert_eq!(Exponent::INFINITY.conjugate(), Exponent::ONE);
        assert_eq!(Exponent::TWO.conjugate(), Exponent::TWO);
        // 3/4 + 1/p' = 1  =>  p' = 4
        assert!(e("4/3").conjugate().approx_eq(Exponent::finite(4.0).unwrap()));
        assert_eq!(e("4/3").conjugate().value(), 4.0);
    }

    #[test]
    fn rejects_sub_one() {
        assert!(Exponent::finite(0.5).is_err());
        assert!(Exponent::finite(f64::NAN).is_err());
        assert!("1/2".parse::<Exponent>().is_err());
        assert!("abc".parse::<Exponent>().is_err());
        assert!(Exponent::from_reciprocal(1.5).is_err());
    }

    #[test]
    fn parses_text_forms() {
        assert_eq!(e("inf"), Exponent::INFINITY);
        assert_eq!(e("Infinity"), Exponent::INFINITY);
        assert_eq!(e("4/3").reciprocal(), 0.75);
        assert_eq!(e("1.5").reciprocal(), 1.0 / 1.5);
        assert_eq!(e("2"), Exponent::TWO);
        assert_eq!(Exponent::INFINITY.to_string(), "inf");
        assert_eq!(e("4/3").to_string(), "1.3333333333333333");
        assert!(e(&e("4/3").to_string()).approx_eq(e("4/3")));
    }

    #[test]
    fn young_r_examples() {
        let p = e("3/2");
        assert_eq!(young_r(p, Exponent::ONE).unwrap().r, p);
        assert_eq!(young_r(Exponent::TWO, Exponent::TWO).unwrap().r, Exponent::INFINITY);
        assert!(matches!(young_r(e("3"), e("3")), Err(HeatError::InvalidTriple { .. })));
        assert_eq!(young_r(e("4/3"), e("4/3")).unwrap().r, Exponent::TWO);
    }

    #[test]
    fn r_infinite_iff_conjugate() {
        for (p, q) in admissible_pairs() {
            let t = young_r(p, q).unwrap();
            assert_eq!(t.r.is_infinite(), q.approx_eq(p.conjugate()), "{p} {q}");
            assert!(YoungTriple::new(t.p, t.q, t.r).is_ok());
        }
    }

    #[test]
    fn triple_validation() {
        assert!(YoungTriple::new(Exponent::TWO, Exponent::TWO, Exponent::TWO).is_err());
        assert!(YoungTriple::new(e("4/3"), e("4/3"), Exponent::TWO).is_ok());
    }

    #[test]
    fn serde_forms() {
        let v: Vec<Exponent> = serde_json::from_str(r#"["4/3", 2, 1.5, "inf"]"#).unwrap();
        assert_eq!(v[0].reciprocal(), 0.75);
        assert_eq!(v[1], Exponent::TWO);
        assert!(v[3].is_infinite());
        assert_eq!(serde_json::to_string(&Exponent::INFINITY).unwrap(), "\"inf\"");
    }
}
