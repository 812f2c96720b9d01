//! Text form of set expressions.
//!
//! ```text
//! set   := cong(INT,INT) | finite{INT,...} | intervals(n>=INT; expr, expr)
//!        | logfrac(expr; [expr,expr), ...) | union(set,set,...)
//!        | inter(set,set) | diff(set,set) | compl(set) | shift(set,INT)
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := INT | n | '(' expr ')'
//! ```
//! Whitespace is ignored everywhere.

use std::fmt;

use num_bigint::BigInt;

use super::index::IndexExpr;
use super::logfrac::{Arc, LogFractional};
use super::{IntervalFamily, SetExpr};
use crate::error::{Error, Result};
use crate::rational;

pub fn parse(text: &str) -> Result<SetExpr> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.set()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn found(&self) -> String {
        match self.peek_raw() {
            Some(c) => format!("`{c}`"),
            None => "end of input".to_string(),
        }
    }

    fn error(&mut self, expected: &str) -> Error {
        self.skip_ws();
        Error::Parse {
            pos: self.pos,
            expected: expected.to_string(),
            found: self.found(),
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("`{token}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if c.is_ascii_alphabetic() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.error("a set constructor"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn digits(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if c.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.error("an integer"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn uint(&mut self) -> Result<u64> {
        let start = self.pos;
        let d = self.digits()?;
        d.parse().map_err(|_| Error::Parse {
            pos: start,
            expected: "an integer that fits in 64 bits".into(),
            found: d.to_string(),
        })
    }

    fn int(&mut self) -> Result<i64> {
        let neg = self.eat("-");
        let start = self.pos;
        let v = self.uint()?;
        let v = i64::try_from(v).map_err(|_| Error::Parse {
            pos: start,
            expected: "a shift that fits in 64 bits".into(),
            found: v.to_string(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn set(&mut self) -> Result<SetExpr> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let name = self.ident()?;
        let located = |e: Error| match e {
            Error::InvalidParameter(msg) => Error::Parse {
                pos: start,
                expected: format!("a valid `{name}`"),
                found: msg,
            },
            other => other,
        };
        match name {
            "cong" => {
                self.expect("(")?;
                let m = self.uint()?;
                self.expect(",")?;
                let r = self.uint()?;
                self.expect(")")?;
                SetExpr::congruence(m, r).map_err(located)
            }
            "finite" => {
                self.expect("{")?;
                let mut elems = Vec::new();
                if !self.eat("}") {
                    loop {
                        elems.push(self.uint()?);
                        if self.eat("}") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                SetExpr::finite(elems).map_err(located)
            }
            "intervals" => {
                self.expect("(")?;
                self.expect("n")?;
                self.expect(">=")?;
                let first = self.uint()?;
                self.expect(";")?;
                let lo = self.expr()?;
                self.expect(",")?;
                let hi = self.expr()?;
                self.expect(")")?;
                IntervalFamily::new(first, lo, hi)
                    .map(SetExpr::Intervals)
                    .map_err(located)
            }
            "logfrac" => {
                self.expect("(")?;
                let theta = self.expr()?.eval_const().map_err(located)?;
                self.expect(";")?;
                let mut arcs = Vec::new();
                loop {
                    self.expect("[")?;
                    let a = self.expr()?.eval_const().map_err(located)?;
                    self.expect(",")?;
                    let b = self.expr()?.eval_const().map_err(located)?;
                    self.expect(")")?;
                    arcs.push(Arc::new(a, b).map_err(located)?);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(")")?;
                LogFractional::new(theta, arcs)
                    .map(SetExpr::LogFractional)
                    .map_err(located)
            }
            "union" => {
                let parts = self.set_list()?;
                if parts.len() < 2 {
                    return Err(located(Error::invalid("union takes at least two sets")));
                }
                Ok(SetExpr::union_all(parts))
            }
            "inter" | "diff" => {
                self.expect("(")?;
                let a = self.set()?;
                self.expect(",")?;
                let b = self.set()?;
                self.expect(")")?;
                Ok(if name == "inter" { a.inter(b) } else { a.diff(b) })
            }
            "compl" => {
                self.expect("(")?;
                let a = self.set()?;
                self.expect(")")?;
                Ok(a.compl())
            }
            "shift" => {
                self.expect("(")?;
                let a = self.set()?;
                self.expect(",")?;
                let t = self.int()?;
                self.expect(")")?;
                Ok(a.shift(t))
            }
            _ => Err(Error::Parse {
                pos: start,
                expected: "one of cong, finite, intervals, logfrac, union, inter, diff, compl, shift"
                    .into(),
                found: format!("`{name}`"),
            }),
        }
    }

    fn set_list(&mut self) -> Result<Vec<SetExpr>> {
        self.expect("(")?;
        let mut parts = vec![self.set()?];
        while self.eat(",") {
            parts.push(self.set()?);
        }
        self.expect(")")?;
        Ok(parts)
    }

    fn expr(&mut self) -> Result<IndexExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = lhs + self.term()?;
            } else if self.peek() == Some('-') {
                self.pos += 1;
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<IndexExpr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat("*") {
                lhs = lhs * self.unary()?;
            } else if self.eat("/") {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<IndexExpr> {
        if self.eat("-") {
            return Ok(match self.unary()? {
                IndexExpr::Int(v) if v >= BigInt::from(0) => IndexExpr::Int(-v),
                other => -other,
            });
        }
        let base = self.atom()?;
        if self.eat("^") {
            let exp = self.unary()?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<IndexExpr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some('n') => {
                self.pos += 1;
                Ok(IndexExpr::Var)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits()?;
                Ok(IndexExpr::Int(d.parse().expect("ascii digits")))
            }
            _ => Err(self.error("an integer, `n`, or `(`")),
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Intervals(fam) => {
                write!(f, "intervals(n>={}; {}, {})", fam.start, fam.lo, fam.hi)
            }
            SetExpr::Congruence { modulus, residue } => write!(f, "cong({modulus},{residue})"),
            SetExpr::LogFractional(l) => {
                write!(f, "logfrac({}; ", rational::fmt_compact(&l.theta))?;
                for (i, arc) in l.arcs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(
                        f,
                        "[{},{})",
                        rational::fmt_compact(&arc.start),
                        rational::fmt_compact(&arc.end)
                    )?;
                }
                f.write_str(")")
            }
            SetExpr::Finite(v) => {
                f.write_str("finite{")?;
                for (i, n) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{n}")?;
                }
                f.write_str("}")
            }
            SetExpr::Union(parts) => {
                f.write_str("union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            SetExpr::Intersection(a, b) => write!(f, "inter({a},{b})"),
            SetExpr::Difference(a, b) => write!(f, "diff({a},{b})"),
            SetExpr::Complement(a) => write!(f, "compl({a})"),
            SetExpr::Shift(a, t) => write!(f, "shift({a},{t})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn parses_congruence() {
        assert_eq!(parse("cong(2,0)").unwrap(), SetExpr::congruence(2, 0).unwrap());
        assert_eq!(parse("  cong ( 2 , 0 ) ").unwrap(), SetExpr::congruence(2, 0).unwrap());
    }

    #[test]
    fn parses_prop41_family() {
        let n = IndexExpr::var;
        let hand = SetExpr::intervals(
            1,
            IndexExpr::int(4).pow(n()),
            (IndexExpr::int(2) - IndexExpr::int(1) / n()) * IndexExpr::int(4).pow(n()),
        )
        .unwrap();
        let text = "intervals(n>=1; 4^n, (2-1/n)*4^n)";
        let parsed = parse(text).unwrap();
        assert_eq!(parsed, hand);
        assert_eq!(parsed.to_string(), text);
    }

    #[test]
    fn parses_logfrac_with_constant_arithmetic() {
        let parsed = parse("logfrac(1/2; [0,1/3+1/24))").unwrap();
        let SetExpr::LogFractional(l) = &parsed else {
            panic!("{parsed:?}")
        };
        assert_eq!(l.theta, ratio(1, 2));
        assert_eq!(l.arcs, vec![Arc::new(ratio(0, 1), ratio(3, 8)).unwrap()]);
        assert_eq!(parsed.to_string(), "logfrac(1/2; [0,3/8))");
        assert_eq!(parse(&parsed.to_string()).unwrap(), parsed);
    }

    #[test]
    fn parses_combinators() {
        let e = parse("diff(union(cong(3,0), finite{1, 2}, shift(cong(5,1),-2)), compl(finite{}))")
            .unwrap();
        assert_eq!(
            e.to_string(),
            "diff(union(cong(3,0),finite{1,2},shift(cong(5,1),-2)),compl(finite{}))"
        );
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn reports_position_and_expectation() {
        match parse("cong(2;0)") {
            Err(Error::Parse { pos, expected, .. }) => {
                assert_eq!(pos, 6);
                assert_eq!(expected, "`,`");
            }
            other => panic!("{other:?}"),
        }
        match parse("frob(1)") {
            Err(Error::Parse { pos: 0, found, .. }) => assert_eq!(found, "`frob`"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("cong(2,5)"), Err(Error::Parse { .. })));
        assert!(matches!(parse("cong(2,0) x"), Err(Error::Parse { .. })));
        assert!(matches!(parse("logfrac(n; [0,1/2))"), Err(Error::Parse { .. })));
        assert!(matches!(parse("union(cong(2,0))"), Err(Error::Parse { .. })));
    }
}
