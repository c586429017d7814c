use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arithmetic mode shared by every coordinate of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Approx => f.write_str("approx"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Mode::Exact),
            "approx" => Ok(Mode::Approx),
            other => Err(Error::usage(format!("unknown mode `{other}`"))),
        }
    }
}

/// A real number, either an exact reduced fraction or a double.
///
/// Binary operations require both operands to share a mode; mixing is a
/// usage error rather than a silent conversion.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Approx(f64),
}

impl Scalar {
    pub fn int(v: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    /// Exact fraction `num/den`; panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn approx(v: f64) -> Self {
        Scalar::Approx(v)
    }

    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(BigRational::zero()),
            Mode::Approx => Scalar::Approx(0.0),
        }
    }

    pub fn one(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(BigRational::one()),
            Mode::Approx => Scalar::Approx(1.0),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Approx(_) => Mode::Approx,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Approx(v) => *v == 0.0,
        }
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Exact(q) => {
                if q.is_zero() {
                    0
                } else if q.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Approx(v) => {
                if *v > 0.0 {
                    1
                } else if *v < 0.0 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    /// Nearest double; huge exact values saturate to infinity.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Approx(_) => None,
        }
    }

    /// Converts into `mode`. Doubles convert to the exact binary fraction
    /// they denote.
    pub fn to_mode(&self, mode: Mode) -> Result<Scalar> {
        match (self, mode) {
            (Scalar::Exact(_), Mode::Exact) | (Scalar::Approx(_), Mode::Approx) => Ok(self.clone()),
            (Scalar::Exact(_), Mode::Approx) => {
                let v = self.to_f64();
                if v.is_finite() {
                    Ok(Scalar::Approx(v))
                } else {
                    Err(Error::domain(format!("{self} is not representable as a double")))
                }
            }
            (Scalar::Approx(v), Mode::Exact) => BigRational::from_float(*v)
                .map(Scalar::Exact)
                .ok_or_else(|| Error::domain(format!("{v} has no exact value"))),
        }
    }

    fn same_mode(&self, other: &Scalar, op: &str) -> Result<()> {
        if self.mode() == other.mode() {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "cannot {op} {} and {} scalars",
                self.mode(),
                other.mode()
            )))
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "add")?;
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a + b),
            _ => unreachable!(),
        })
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "subtract")?;
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a - b),
            _ => unreachable!(),
        })
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "multiply")?;
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a * b),
            _ => unreachable!(),
        })
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "divide")?;
        if other.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a / b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a / b),
            _ => unreachable!(),
        })
    }

    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering> {
        self.same_mode(other, "compare")?;
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(a.cmp(b)),
            (Scalar::Approx(a), Scalar::Approx(b)) => {
                a.partial_cmp(b).ok_or_else(|| Error::domain("comparison with NaN"))
            }
            _ => unreachable!(),
        }
    }

    pub fn pow(&self, exp: u32) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(num_traits::pow(q.clone(), exp as usize)),
            Scalar::Approx(v) => Scalar::Approx(v.powi(exp as i32)),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Approx(v) => Scalar::Approx(v.abs()),
        }
    }

    /// Parses a literal, choosing the mode from its shape: `n/d` and bare
    /// integers are exact, anything else is a double.
    pub fn parse(text: &str) -> Result<Scalar> {
        let t = text.trim();
        if t.contains('/') || is_integer_literal(t) {
            parse_fraction(t).map(Scalar::Exact)
        } else {
            parse_double(t).map(Scalar::Approx)
        }
    }

    /// Parses a literal into the requested mode. Decimal literals become exact
    /// decimal fractions in exact mode (`0.9` is `9/10`).
    pub fn parse_in(text: &str, mode: Mode) -> Result<Scalar> {
        let t = text.trim();
        match mode {
            Mode::Exact => {
                if t.contains('/') || is_integer_literal(t) {
                    parse_fraction(t).map(Scalar::Exact)
                } else {
                    parse_decimal_exact(t).map(Scalar::Exact)
                }
            }
            Mode::Approx => {
                if t.contains('/') {
                    let q = parse_fraction(t)?;
                    Ok(Scalar::Approx(q.to_f64().unwrap_or(f64::NAN)))
                } else {
                    parse_double(t).map(Scalar::Approx)
                }
            }
        }
    }
}

fn is_integer_literal(t: &str) -> bool {
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn parse_bigint(t: &str) -> Result<BigInt> {
    let digits = t.strip_prefix('+').unwrap_or(t);
    digits
        .parse::<BigInt>()
        .map_err(|_| Error::usage(format!("invalid integer `{t}`")))
}

fn parse_fraction(t: &str) -> Result<BigRational> {
    match t.split_once('/') {
        Some((num, den)) => {
            let num = parse_bigint(num.trim())?;
            let den = parse_bigint(den.trim())?;
            if den.is_zero() {
                return Err(Error::usage(format!("zero denominator in `{t}`")));
            }
            Ok(BigRational::new(num, den))
        }
        None => Ok(BigRational::from_integer(parse_bigint(t)?)),
    }
}

fn parse_double(t: &str) -> Result<f64> {
    let v: f64 = t.parse().map_err(|_| Error::usage(format!("invalid number `{t}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::usage(format!("non-finite number `{t}`")))
    }
}

/// `[-]digits[.digits][e[-]digits]` as an exact fraction.
fn parse_decimal_exact(t: &str) -> Result<BigRational> {
    let bad = || Error::usage(format!("invalid decimal `{t}`"));
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let q = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(q)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) if q.denom().is_one() => write!(f, "{}", q.numer()),
            Scalar::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            // Debug formatting is the shortest representation that round-trips.
            Scalar::Approx(v) => write!(f, "{v:?}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scalar::parse(s)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Approx(v)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::Exact(q)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(_) => serializer.collect_str(self),
            Scalar::Approx(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) => Ok(Scalar::int(v)),
            Raw::Float(v) => Ok(Scalar::Approx(v)),
            Raw::Text(s) => Scalar::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_picks_mode_from_shape() {
        assert_eq!(Scalar::parse("3/6").unwrap(), Scalar::ratio(1, 2));
        assert_eq!(Scalar::parse("-4").unwrap(), Scalar::int(-4));
        assert_eq!(Scalar::parse("0.25").unwrap(), Scalar::approx(0.25));
        assert!(Scalar::parse("1/0").is_err());
        assert!(Scalar::parse("abc").is_err());
    }

    #[test]
    fn exact_decimal_parsing() {
        assert_eq!(Scalar::parse_in("0.9", Mode::Exact).unwrap(), Scalar::ratio(9, 10));
        assert_eq!(Scalar::parse_in("-1.25e-1", Mode::Exact).unwrap(), Scalar::ratio(-1, 8));
        assert_eq!(Scalar::parse_in("2e3", Mode::Exact).unwrap(), Scalar::int(2000));
        assert_eq!(Scalar::parse_in("1/4", Mode::Approx).unwrap(), Scalar::approx(0.25));
    }

    #[test]
    fn mixing_modes_is_rejected() {
        let e = Scalar::int(1).try_add(&Scalar::approx(1.0));
        assert!(matches!(e, Err(Error::Usage(_))));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            Scalar::ratio(-7, 3),
            Scalar::int(5),
            Scalar::approx(6.123233995736766e-17),
        ] {
            let back = Scalar::parse(&s.to_string()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn approx_to_exact_is_the_binary_value() {
        let q = Scalar::approx(0.5).to_mode(Mode::Exact).unwrap();
        assert_eq!(q, Scalar::ratio(1, 2));
    }
}
