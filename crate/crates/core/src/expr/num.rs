//! Numeric constants: exact rationals until a float shows up.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};

/// A constant leaf. Rationals stay exact; any float operand makes the result a float.
#[derive(Clone, Copy, Debug)]
pub enum Num {
    Rational(Rational64),
    Float(f64),
}

impl Num {
    pub fn int(n: i64) -> Self {
        Num::Rational(Rational64::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Num::Rational(Rational64::new(n, d))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Num::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Num::Float(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Num::Rational(r) => r.is_zero(),
            Num::Float(f) => f == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Num::Rational(r) => r.is_one(),
            Num::Float(f) => f == 1.0,
        }
    }

    pub fn is_exact_one(self) -> bool {
        matches!(self, Num::Rational(r) if r.is_one())
    }

    pub fn is_exact_zero(self) -> bool {
        matches!(self, Num::Rational(r) if r.is_zero())
    }

    pub fn is_negative(self) -> bool {
        match self {
            Num::Rational(r) => r.is_negative(),
            Num::Float(f) => f < 0.0,
        }
    }

    /// Integer value of an exact rational.
    pub fn as_integer(self) -> Option<i64> {
        match self {
            Num::Rational(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    pub fn add(self, other: Num) -> Num {
        match (self, other) {
            (Num::Rational(a), Num::Rational(b)) => match a.checked_add(&b) {
                Some(r) => Num::Rational(r),
                None => Num::Float(self.to_f64() + other.to_f64()),
            },
            _ => Num::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(self, other: Num) -> Num {
        match (self, other) {
            (Num::Rational(a), Num::Rational(b)) => match a.checked_mul(&b) {
                Some(r) => Num::Rational(r),
                None => Num::Float(self.to_f64() * other.to_f64()),
            },
            _ => Num::Float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(self) -> Num {
        match self {
            Num::Rational(r) => match r.numer().checked_neg() {
                Some(n) => Num::Rational(Rational64::new_raw(n, *r.denom())),
                None => Num::Float(-self.to_f64()),
            },
            Num::Float(f) => Num::Float(-f),
        }
    }

    pub fn abs(self) -> Num {
        if self.is_negative() {
            self.neg()
        } else {
            self
        }
    }

    /// `self^exp`, exact when both are rationals and `exp` is an integer.
    /// Returns `None` for `0^negative` or a negative base raised to a non-integer.
    pub fn pow(self, exp: Num) -> Option<Num> {
        if let (Num::Rational(base), Some(n)) = (self, exp.as_integer()) {
            if base.is_zero() && n < 0 {
                return None;
            }
            if let Some(r) = rational_powi(base, n) {
                return Some(Num::Rational(r));
            }
        }
        if let (Num::Rational(_), Num::Rational(_)) = (self, exp) {
            // Irrational results such as 2^(1/2) stay symbolic.
            exp.as_integer()?;
        }
        let b = self.to_f64();
        let e = exp.to_f64();
        if b == 0.0 && e < 0.0 {
            return None;
        }
        let v = b.powf(e);
        if v.is_nan() {
            None
        } else {
            Some(Num::Float(v))
        }
    }
}

fn rational_powi(base: Rational64, n: i64) -> Option<Rational64> {
    let (b, e) = if n < 0 {
        (base.recip(), n.checked_neg()?)
    } else {
        (base, n)
    };
    if e > 64 {
        return None;
    }
    let mut acc = Rational64::one();
    for _ in 0..e {
        acc = acc.checked_mul(&b)?;
    }
    Some(acc)
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Num {}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Num {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Num::Rational(a), Num::Rational(b)) => a.cmp(b),
            (Num::Float(a), Num::Float(b)) => a.total_cmp(b),
            (Num::Rational(_), Num::Float(_)) => self
                .to_f64()
                .total_cmp(&other.to_f64())
                .then(Ordering::Less),
            (Num::Float(_), Num::Rational(_)) => self
                .to_f64()
                .total_cmp(&other.to_f64())
                .then(Ordering::Greater),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Num::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Num::Float(x) => {
                let s = format!("{x}");
                if s.contains('.') || !x.is_finite() {
                    write!(f, "{s}")
                } else {
                    write!(f, "{s}.0")
                }
            }
        }
    }
}
