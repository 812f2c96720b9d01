//! Closed arithmetic expressions over the family index `n`, used for the
//! endpoints of interval families and for rational constants in the DSL.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest exponent magnitude accepted by `^`.
pub const MAX_EXPONENT: i64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexExpr {
    Int(BigInt),
    Var,
    Neg(Box<IndexExpr>),
    Add(Box<IndexExpr>, Box<IndexExpr>),
    Sub(Box<IndexExpr>, Box<IndexExpr>),
    Mul(Box<IndexExpr>, Box<IndexExpr>),
    Div(Box<IndexExpr>, Box<IndexExpr>),
    Pow(Box<IndexExpr>, Box<IndexExpr>),
}

impl IndexExpr {
    pub fn int(v: i64) -> Self {
        IndexExpr::Int(BigInt::from(v))
    }

    pub fn var() -> Self {
        IndexExpr::Var
    }

    /// Exact rational constant, rendered as `p/q` when non-integral.
    pub fn rational(r: &Rational) -> Self {
        if r.is_integer() {
            IndexExpr::Int(r.numer().clone())
        } else {
            IndexExpr::Int(r.numer().clone()) / IndexExpr::Int(r.denom().clone())
        }
    }

    pub fn pow(self, exp: IndexExpr) -> Self {
        IndexExpr::Pow(Box::new(self), Box::new(exp))
    }

    pub fn has_var(&self) -> bool {
        match self {
            IndexExpr::Int(_) => false,
            IndexExpr::Var => true,
            IndexExpr::Neg(a) => a.has_var(),
            IndexExpr::Add(a, b)
            | IndexExpr::Sub(a, b)
            | IndexExpr::Mul(a, b)
            | IndexExpr::Div(a, b)
            | IndexExpr::Pow(a, b) => a.has_var() || b.has_var(),
        }
    }

    pub fn eval(&self, n: u64) -> Result<Rational> {
        Ok(match self {
            IndexExpr::Int(v) => BigRational::from_integer(v.clone()),
            IndexExpr::Var => BigRational::from_integer(BigInt::from(n)),
            IndexExpr::Neg(a) => -a.eval(n)?,
            IndexExpr::Add(a, b) => a.eval(n)? + b.eval(n)?,
            IndexExpr::Sub(a, b) => a.eval(n)? - b.eval(n)?,
            IndexExpr::Mul(a, b) => a.eval(n)? * b.eval(n)?,
            IndexExpr::Div(a, b) => {
                let d = b.eval(n)?;
                if d.is_zero() {
                    return Err(Error::invalid(format!("division by zero in `{self}` at n={n}")));
                }
                a.eval(n)? / d
            }
            IndexExpr::Pow(a, b) => {
                let base = a.eval(n)?;
                let exp = b.eval(n)?;
                if !exp.is_integer() {
                    return Err(Error::invalid(format!("non-integer exponent in `{self}` at n={n}")));
                }
                let e = exp
                    .to_integer()
                    .to_i64()
                    .filter(|e| e.abs() <= MAX_EXPONENT)
                    .ok_or_else(|| Error::invalid(format!("exponent too large in `{self}`")))?;
                if base.is_zero() && e < 0 {
                    return Err(Error::invalid(format!("zero to a negative power in `{self}`")));
                }
                base.pow(e as i32)
            }
        })
    }

    /// Evaluates an expression that must not mention `n`.
    pub fn eval_const(&self) -> Result<Rational> {
        if self.has_var() {
            return Err(Error::invalid(format!("`{self}` must be a constant")));
        }
        self.eval(0)
    }

    fn precedence(&self) -> u8 {
        match self {
            IndexExpr::Add(..) | IndexExpr::Sub(..) => 1,
            IndexExpr::Mul(..) | IndexExpr::Div(..) => 2,
            IndexExpr::Neg(_) => 3,
            IndexExpr::Int(v) if v.is_negative() => 3,
            IndexExpr::Pow(..) => 4,
            IndexExpr::Int(_) | IndexExpr::Var => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let paren = self.precedence() < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match self {
            IndexExpr::Int(v) => write!(f, "{v}")?,
            IndexExpr::Var => f.write_str("n")?,
            IndexExpr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 3)?;
            }
            IndexExpr::Add(a, b) => binary(f, a, "+", b, 1)?,
            IndexExpr::Sub(a, b) => binary(f, a, "-", b, 1)?,
            IndexExpr::Mul(a, b) => binary(f, a, "*", b, 2)?,
            IndexExpr::Div(a, b) => binary(f, a, "/", b, 2)?,
            IndexExpr::Pow(a, b) => {
                a.write_at(f, 5)?;
                f.write_str("^")?;
                b.write_at(f, 3)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn binary(
    f: &mut fmt::Formatter<'_>,
    a: &IndexExpr,
    op: &str,
    b: &IndexExpr,
    prec: u8,
) -> fmt::Result {
    a.write_at(f, prec)?;
    f.write_str(op)?;
    b.write_at(f, prec + 1)
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl std::ops::$tr for IndexExpr {
            type Output = IndexExpr;
            fn $method(self, rhs: IndexExpr) -> IndexExpr {
                IndexExpr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for IndexExpr {
    type Output = IndexExpr;
    fn neg(self) -> IndexExpr {
        IndexExpr::Neg(Box::new(self))
    }
}
