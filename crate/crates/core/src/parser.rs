//! Front-end for identity statements.
//!
//! Grammar (LL(1), `#` line comments, one identity per file):
//!
//! ```text
//! file     := decl* identity
//! decl     := "params" name+ ";" | "assume" linconstr ";"
//!           | "case" ("even"|"odd") "(" name ")" ";"
//! identity := "sum" "(" name "," expr "," expr "," expr ")" "=" expr
//! expr     := term (("+"|"-") term)*
//! term     := unary (("*"|"/") unary)*
//! unary    := ["-"] atom ["^" (integer | atom)]
//! atom     := integer | name | "binom" "(" expr "," expr ")"
//!           | "fact" "(" expr ")" | "(" expr ")"
//! ```
//!
//! Precedence: ^ binds tighter than unary minus, which binds tighter than
//! * and /, which bind tighter than + and -.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hyperterm::{FactorKind, HyperTerm, LinExpr, PowBase};
use crate::symcore::{rat_int, Polynomial, Rat, RationalFunction, Vars};

pub const SUM_VAR: &str = "k";
pub const REC_VAR: &str = "n";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintOp {
    Ge,
    Gt,
    Le,
    Lt,
    Ne,
    Eq,
}

impl ConstraintOp {
    pub fn render(self) -> &'static str {
        match self {
            ConstraintOp::Ge => ">=",
            ConstraintOp::Gt => ">",
            ConstraintOp::Le => "<=",
            ConstraintOp::Lt => "<",
            ConstraintOp::Ne => "!=",
            ConstraintOp::Eq => "=",
        }
    }
}

/// Integer-linear constraint `lhs op rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub lhs: LinExpr,
    pub op: ConstraintOp,
    pub rhs: LinExpr,
}

impl Constraint {
    pub fn render(&self) -> String {
        format!("{} {} {}", self.lhs.render(), self.op.render(), self.rhs.render())
    }

    /// Check the constraint at an integer point.
    pub fn holds(&self, asn: &BTreeMap<String, Rat>) -> Result<bool> {
        let l = self.lhs.eval(asn)?;
        let r = self.rhs.eval(asn)?;
        Ok(match self.op {
            ConstraintOp::Ge => l >= r,
            ConstraintOp::Gt => l > r,
            ConstraintOp::Le => l <= r,
            ConstraintOp::Lt => l < r,
            ConstraintOp::Ne => l != r,
            ConstraintOp::Eq => l == r,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    None,
    Even,
    Odd,
}

/// A parsed statement `sum_{k=lo}^{hi} f(n,k) = r(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Identity {
    pub sum_var: String,
    pub sum_lo: LinExpr,
    pub sum_hi: LinExpr,
    pub summand: HyperTerm,
    pub rhs: HyperTerm,
    pub params: Vec<String>,
    pub assumptions: Vec<Constraint>,
    pub case_tag: CaseTag,
    vars: Vars,
}

impl Identity {
    pub fn vars(&self) -> &Vars {
        &self.vars
    }
}

/// A recorded range transformation `sum_{k=a}^{b} f(k) = sum_{k=0}^{b-a} f(k+a)`.
#[derive(Clone, Debug)]
pub struct NormObligation {
    pub statement: String,
    pub shift: LinExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Invalid(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
    Assign,
    Ge,
    Gt,
    Le,
    Lt,
    Ne,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> std::result::Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        let bump = |chars: &mut std::iter::Peekable<std::str::Chars>,
                        line: &mut usize,
                        col: &mut usize| {
            let c = chars.next().unwrap();
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    bump(&mut chars, &mut line, &mut col);
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                bump(&mut chars, &mut line, &mut col);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(bump(&mut chars, &mut line, &mut col));
                    } else {
                        break;
                    }
                }
                let v = s.parse::<i64>().map_err(|_| ParseError {
                    line: l0,
                    col: c0,
                    message: format!("integer literal `{}` out of range", s),
                })?;
                out.push(Spanned { tok: Tok::Int(v), line: l0, col: c0 });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(bump(&mut chars, &mut line, &mut col));
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Name(s), line: l0, col: c0 });
            }
            _ => {
                let c = bump(&mut chars, &mut line, &mut col);
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Assign,
                    '>' => {
                        if chars.peek() == Some(&'=') {
                            bump(&mut chars, &mut line, &mut col);
                            Tok::Ge
                        } else {
                            Tok::Gt
                        }
                    }
                    '<' => {
                        if chars.peek() == Some(&'=') {
                            bump(&mut chars, &mut line, &mut col);
                            Tok::Le
                        } else {
                            Tok::Lt
                        }
                    }
                    '!' => {
                        if chars.peek() == Some(&'=') {
                            bump(&mut chars, &mut line, &mut col);
                            Tok::Ne
                        } else {
                            return Err(ParseError {
                                line: l0,
                                col: c0,
                                message: "expected `!=`".into(),
                            });
                        }
                    }
                    other => {
                        return Err(ParseError {
                            line: l0,
                            col: c0,
                            message: format!("unexpected character `{}`", other),
                        })
                    }
                };
                out.push(Spanned { tok, line: l0, col: c0 });
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Expression values: polynomial-valued or general hypergeometric term
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Value {
    Poly(RationalFunction),
    Term(HyperTerm),
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vars: Vars,
    declared: Vec<String>,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn err<T>(&self, message: impl Into<String>) -> std::result::Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Tok, what: &str) -> std::result::Result<(), ParseError> {
        if self.peek() == t {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected {}", what))
        }
    }

    fn expect_name(&mut self) -> std::result::Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Name(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    // expr := term (("+"|"-") term)*
    fn parse_expr(&mut self) -> std::result::Result<Value, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    acc = self.combine_add(acc, rhs, false)?;
                }
                Tok::Minus => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    acc = self.combine_add(acc, rhs, true)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn combine_add(
        &self,
        a: Value,
        b: Value,
        negate: bool,
    ) -> std::result::Result<Value, ParseError> {
        match (a, b) {
            (Value::Poly(x), Value::Poly(y)) => {
                let y = if negate { y.neg() } else { y };
                x.add(&y)
                    .map(Value::Poly)
                    .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())
            }
            _ => self.err(
                "sums of non-polynomial terms are not hypergeometric in this representation",
            ),
        }
    }

    // term := unary (("*"|"/") unary)*
    fn parse_term(&mut self) -> std::result::Result<Value, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    acc = self.combine_mul(acc, rhs, false)?;
                }
                Tok::Slash => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    acc = self.combine_mul(acc, rhs, true)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn to_term(&self, v: Value) -> std::result::Result<HyperTerm, ParseError> {
        match v {
            Value::Term(t) => Ok(t),
            Value::Poly(rf) => {
                let mut t = HyperTerm::one(&self.vars);
                if rf.is_zero() {
                    return self.err("zero factor in a product");
                }
                if !rf.num().is_one() {
                    t = t
                        .mul(
                            &HyperTerm::from_factor(
                                &self.vars,
                                FactorKind::Poly(rf.num().clone()),
                                1,
                            )
                            .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())?,
                        )
                        .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())?;
                }
                if !rf.den().is_one() {
                    t = t
                        .mul(
                            &HyperTerm::from_factor(
                                &self.vars,
                                FactorKind::Poly(rf.den().clone()),
                                -1,
                            )
                            .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())?,
                        )
                        .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())?;
                }
                Ok(t)
            }
        }
    }

    fn combine_mul(
        &self,
        a: Value,
        b: Value,
        divide: bool,
    ) -> std::result::Result<Value, ParseError> {
        match (a, b) {
            (Value::Poly(x), Value::Poly(y)) => {
                let r = if divide { x.div(&y) } else { x.mul(&y) };
                r.map(Value::Poly)
                    .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())
            }
            (a, b) => {
                let ta = self.to_term(a)?;
                let tb = self.to_term(b)?;
                let r = if divide { ta.div(&tb) } else { ta.mul(&tb) };
                r.map(Value::Term)
                    .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())
            }
        }
    }

    // unary := ["-"] atom ["^" (integer | atom)]
    fn parse_unary(&mut self) -> std::result::Result<Value, ParseError> {
        if self.peek() == &Tok::Minus {
            self.advance();
            let v = self.parse_unary()?;
            return Ok(match v {
                Value::Poly(p) => Value::Poly(p.neg()),
                Value::Term(t) => {
                    let neg = HyperTerm::from_factor(
                        &self.vars,
                        FactorKind::Const(rat_int(-1)),
                        1,
                    )
                    .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())?;
                    Value::Term(
                        t.mul(&neg)
                            .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())?,
                    )
                }
            });
        }
        let base = self.parse_atom()?;
        if self.peek() != &Tok::Caret {
            return Ok(base);
        }
        self.advance();
        // integer exponent => multiplicity; otherwise a symbolic exponent
        match self.peek().clone() {
            Tok::Int(e) => {
                self.advance();
                self.apply_int_pow(base, e)
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(e) => {
                        self.advance();
                        self.apply_int_pow(base, -e)
                    }
                    _ => self.err("expected an integer after `^-`"),
                }
            }
            _ => {
                let exp = self.parse_atom()?;
                let lin = self.value_to_linexpr(&exp)?;
                let powbase = self.value_to_powbase(&base)?;
                HyperTerm::from_factor(&self.vars, FactorKind::Power(powbase, lin), 1)
                    .map(Value::Term)
                    .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())
            }
        }
    }

    fn apply_int_pow(&self, base: Value, e: i64) -> std::result::Result<Value, ParseError> {
        match base {
            Value::Poly(p) => p
                .pow_i(e)
                .map(Value::Poly)
                .map_err(|er| self.err::<()>(er.to_string()).unwrap_err()),
            Value::Term(t) => t
                .pow(e)
                .map(Value::Term)
                .map_err(|er| self.err::<()>(er.to_string()).unwrap_err()),
        }
    }

    fn value_to_linexpr(&self, v: &Value) -> std::result::Result<LinExpr, ParseError> {
        let rf = match v {
            Value::Poly(p) => p.clone(),
            Value::Term(_) => {
                return self.err("exponent must be an integer-linear expression")
            }
        };
        if !rf.den().is_one() {
            return self.err("exponent must be an integer-linear expression");
        }
        match crate::hyperterm::poly_to_linexpr(rf.num()) {
            Some(l) => Ok(l),
            None => self.err(format!(
                "argument `{}` is not integer-linear",
                rf.render()
            )),
        }
    }

    fn value_to_powbase(&self, v: &Value) -> std::result::Result<PowBase, ParseError> {
        let rf = match v {
            Value::Poly(p) => p.clone(),
            Value::Term(_) => return self.err("power base must be rational or parameter-linear"),
        };
        if let Some(c) = rf.as_constant() {
            if c.is_zero() {
                return self.err("zero power base");
            }
            return Ok(PowBase::Rational(c));
        }
        if !rf.den().is_one() {
            return self.err("power base must be rational or parameter-linear");
        }
        match crate::hyperterm::poly_to_linexpr(rf.num()) {
            Some(l) => {
                if l.coeff(SUM_VAR) != 0 || l.coeff(REC_VAR) != 0 {
                    self.err("symbolic power base may involve parameters only")
                } else {
                    Ok(PowBase::ParamExpr(l))
                }
            }
            None => self.err("power base must be rational or parameter-linear"),
        }
    }

    // atom := integer | name | binom(expr, expr) | fact(expr) | (expr)
    fn parse_atom(&mut self) -> std::result::Result<Value, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Value::Poly(RationalFunction::constant(&self.vars, rat_int(v))))
            }
            Tok::LParen => {
                self.advance();
                let v = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(v)
            }
            Tok::Name(name) => {
                self.advance();
                match name.as_str() {
                    "binom" => {
                        self.expect(&Tok::LParen, "`(` after binom")?;
                        let top = self.parse_expr()?;
                        self.expect(&Tok::Comma, "`,` between binomial arguments")?;
                        let bot = self.parse_expr()?;
                        self.expect(&Tok::RParen, "`)` after binomial arguments")?;
                        let t = self.value_to_linexpr(&top)?;
                        let b = self.value_to_linexpr(&bot)?;
                        HyperTerm::from_factor(&self.vars, FactorKind::Binom(t, b), 1)
                            .map(Value::Term)
                            .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())
                    }
                    "fact" => {
                        self.expect(&Tok::LParen, "`(` after fact")?;
                        let arg = self.parse_expr()?;
                        self.expect(&Tok::RParen, "`)` after factorial argument")?;
                        let a = self.value_to_linexpr(&arg)?;
                        HyperTerm::from_factor(&self.vars, FactorKind::Factorial(a), 1)
                            .map(Value::Term)
                            .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())
                    }
                    _ => {
                        if !self.declared.iter().any(|d| d == &name) {
                            return self.err(format!(
                                "unknown name `{}` (declare parameters with `params`)",
                                name
                            ));
                        }
                        let p = Polynomial::var(&self.vars, &name)
                            .map_err(|e| self.err::<()>(e.to_string()).unwrap_err())?;
                        Ok(Value::Poly(RationalFunction::from_poly(p)))
                    }
                }
            }
            _ => self.err("expected an integer, name, binom(...), fact(...) or `(`"),
        }
    }

    fn parse_linconstr(&mut self) -> std::result::Result<Constraint, ParseError> {
        let lhs = self.parse_expr()?;
        let op = match self.advance() {
            Tok::Ge => ConstraintOp::Ge,
            Tok::Gt => ConstraintOp::Gt,
            Tok::Le => ConstraintOp::Le,
            Tok::Lt => ConstraintOp::Lt,
            Tok::Ne => ConstraintOp::Ne,
            Tok::Assign => ConstraintOp::Eq,
            _ => return self.err("expected a comparison operator"),
        };
        let rhs = self.parse_expr()?;
        let l = self.value_to_linexpr(&lhs)?;
        let r = self.value_to_linexpr(&rhs)?;
        Ok(Constraint { lhs: l, op, rhs: r })
    }
}

/// Parse one identity file.
pub fn parse_identity(text: &str) -> std::result::Result<Identity, ParseError> {
    // Pre-scan declarations to fix the variable list (k first, then n,
    // then parameters in declaration order).
    let toks = lex(text)?;
    let mut params: Vec<String> = Vec::new();
    {
        let mut i = 0usize;
        while i < toks.len() {
            if let Tok::Name(n) = &toks[i].tok {
                if n == "params" {
                    let mut j = i + 1;
                    while let Tok::Name(p) = &toks[j].tok {
                        if p != REC_VAR && p != SUM_VAR && !params.contains(p) {
                            params.push(p.clone());
                        }
                        j += 1;
                    }
                    i = j;
                    continue;
                }
            }
            i += 1;
        }
    }
    let mut names: Vec<String> = vec![SUM_VAR.to_string(), REC_VAR.to_string()];
    names.extend(params.iter().cloned());
    let vars = Vars::new(names);
    let mut declared = vec![SUM_VAR.to_string(), REC_VAR.to_string()];
    declared.extend(params.iter().cloned());

    let mut p = Parser {
        toks,
        pos: 0,
        vars: vars.clone(),
        declared,
        text,
    };
    let _ = p.text;

    let mut assumptions: Vec<Constraint> = Vec::new();
    let mut case_tag = CaseTag::None;
    loop {
        match p.peek().clone() {
            Tok::Name(n) if n == "params" => {
                p.advance();
                let mut saw = false;
                while matches!(p.peek(), Tok::Name(_)) {
                    p.expect_name()?;
                    saw = true;
                }
                if !saw {
                    return p.err("expected at least one parameter name");
                }
                p.expect(&Tok::Semi, "`;` after params")?;
            }
            Tok::Name(n) if n == "assume" => {
                p.advance();
                let c = p.parse_linconstr()?;
                p.expect(&Tok::Semi, "`;` after assumption")?;
                assumptions.push(c);
            }
            Tok::Name(n) if n == "case" => {
                p.advance();
                let which = p.expect_name()?;
                case_tag = match which.as_str() {
                    "even" => CaseTag::Even,
                    "odd" => CaseTag::Odd,
                    _ => return p.err("expected `even` or `odd`"),
                };
                p.expect(&Tok::LParen, "`(`")?;
                let v = p.expect_name()?;
                if v != REC_VAR {
                    return p.err(format!("case splits apply to `{}`", REC_VAR));
                }
                p.expect(&Tok::RParen, "`)`")?;
                p.expect(&Tok::Semi, "`;` after case")?;
            }
            _ => break,
        }
    }

    // identity := sum(k, lo, hi, summand) = rhs
    match p.peek().clone() {
        Tok::Name(n) if n == "sum" => {
            p.advance();
        }
        _ => return p.err("expected `sum(...)`"),
    }
    p.expect(&Tok::LParen, "`(` after sum")?;
    let sv = p.expect_name()?;
    if sv != SUM_VAR {
        return p.err(format!("the summation variable must be `{}`", SUM_VAR));
    }
    p.expect(&Tok::Comma, "`,`")?;
    let lo_v = p.parse_expr()?;
    p.expect(&Tok::Comma, "`,`")?;
    let hi_v = p.parse_expr()?;
    p.expect(&Tok::Comma, "`,`")?;
    let summand_v = p.parse_expr()?;
    p.expect(&Tok::RParen, "`)` closing sum")?;
    p.expect(&Tok::Assign, "`=` between sum and right-hand side")?;
    let rhs_v = p.parse_expr()?;
    if p.peek() != &Tok::Eof {
        return p.err("trailing input after the identity");
    }

    let lo = p.value_to_linexpr(&lo_v)?;
    let hi = p.value_to_linexpr(&hi_v)?;
    if lo.coeff(SUM_VAR) != 0 || hi.coeff(SUM_VAR) != 0 {
        return p.err("summation bounds must not involve the summation variable");
    }
    let summand = p.to_term(summand_v)?;
    let rhs = p.to_term(rhs_v)?;
    if rhs_mentions_sum_var(&rhs) {
        return p.err("the summation variable must not occur on the right-hand side");
    }
    Ok(Identity {
        sum_var: SUM_VAR.to_string(),
        sum_lo: lo,
        sum_hi: hi,
        summand,
        rhs,
        params,
        assumptions,
        case_tag,
        vars,
    })
}

fn rhs_mentions_sum_var(t: &HyperTerm) -> bool {
    let uses = |e: &LinExpr| e.coeff(SUM_VAR) != 0;
    if t.sign_exp.as_ref().map(uses).unwrap_or(false) {
        return true;
    }
    t.factors.iter().any(|f| match &f.kind {
        FactorKind::Binom(a, b) => uses(a) || uses(b),
        FactorKind::Factorial(e) => uses(e),
        FactorKind::Power(base, e) => {
            uses(e)
                || match base {
                    PowBase::ParamExpr(p) => uses(p),
                    PowBase::Rational(_) => false,
                }
        }
        FactorKind::Poly(p) => p
            .vars()
            .index_of(SUM_VAR)
            .map(|i| p.depends_on(i))
            .unwrap_or(false),
        FactorKind::Const(_) => false,
    })
}

/// Canonical rendering; `parse(print(x))` equals `x` structurally.
pub fn print_identity(id: &Identity) -> String {
    let mut out = String::new();
    if !id.params.is_empty() {
        out.push_str(&format!("params {};\n", id.params.join(" ")));
    }
    for a in &id.assumptions {
        out.push_str(&format!("assume {};\n", a.render()));
    }
    match id.case_tag {
        CaseTag::None => {}
        CaseTag::Even => out.push_str(&format!("case even({});\n", REC_VAR)),
        CaseTag::Odd => out.push_str(&format!("case odd({});\n", REC_VAR)),
    }
    out.push_str(&format!(
        "sum({}, {}, {}, {}) = {}",
        id.sum_var,
        id.sum_lo.render(),
        id.sum_hi.render(),
        id.summand.render(),
        id.rhs.render()
    ));
    out
}

/// Rewrite the summation to start at 0 (index shift), recording the
/// transformation as a normalization obligation.
pub fn range_normalize(id: &Identity) -> Result<(Identity, Vec<NormObligation>)> {
    if id.sum_lo == LinExpr::constant(0) {
        return Ok((id.clone(), vec![]));
    }
    let shift = id.sum_lo.clone();
    let gap = id.sum_hi.sub(&shift);
    // the gap must stay integer-linear in n and the parameters (it is by
    // construction; reject pathological summation-variable dependence)
    if gap.coeff(SUM_VAR) != 0 {
        return Err(Error::Invalid(
            "summation bounds must not involve the summation variable".into(),
        ));
    }
    let repl = LinExpr::var(SUM_VAR).add(&shift);
    let new_summand = id.summand.substitute_linear(SUM_VAR, &repl)?;
    let statement = format!(
        "sum({sv}, {a}, {b}, f({sv})) = sum({sv}, 0, {gap}, f({sv}+{a})) for f := {f}",
        sv = SUM_VAR,
        a = shift.render(),
        b = id.sum_hi.render(),
        gap = gap.render(),
        f = id.summand.render()
    );
    let mut out = id.clone();
    out.sum_lo = LinExpr::constant(0);
    out.sum_hi = gap;
    out.summand = new_summand;
    Ok((
        out,
        vec![NormObligation {
            statement,
            shift,
        }],
    ))
}

/// Split an identity into parity branches: n := 2t and n := 2t+1, each an
/// independent proving task tagged even/odd. The substituted variable keeps
/// the name `n` (it now denotes the halved index).
pub fn split_parity(id: &Identity) -> Result<(Identity, Identity)> {
    if id.case_tag != CaseTag::None {
        return Err(Error::Invalid(
            "identity is already a parity branch".into(),
        ));
    }
    let make = |mul: i64, add: i64, tag: CaseTag| -> Result<Identity> {
        let repl = LinExpr::var(REC_VAR).scale(mul).add_const(add);
        let mut out = id.clone();
        out.summand = out.summand.substitute_linear(REC_VAR, &repl)?;
        out.rhs = out.rhs.substitute_linear(REC_VAR, &repl)?;
        out.sum_lo = out.sum_lo.substitute(REC_VAR, &repl);
        out.sum_hi = out.sum_hi.substitute(REC_VAR, &repl);
        out.case_tag = tag;
        Ok(out)
    };
    Ok((make(2, 0, CaseTag::Even)?, make(2, 1, CaseTag::Odd)?))
}

/// Exact numeric sum of the summand over the range at the given assignment
/// of `n` and parameters. Poles and undefined points propagate as errors.
pub fn sum_at(id: &Identity, outer: &BTreeMap<String, Rat>) -> Result<Rat> {
    let lo = id.sum_lo.eval_int(outer)?;
    let hi = id.sum_hi.eval_int(outer)?;
    let mut acc = Rat::zero();
    let mut k = lo.clone();
    while k <= hi {
        let mut asn = outer.clone();
        asn.insert(
            SUM_VAR.to_string(),
            Rat::from_integer(k.clone()),
        );
        acc += id.summand.eval(&asn)?;
        k += 1;
    }
    Ok(acc)
}

/// Exact right-hand side value at the assignment.
pub fn rhs_at(id: &Identity, outer: &BTreeMap<String, Rat>) -> Result<Rat> {
    let mut asn = outer.clone();
    asn.insert(SUM_VAR.to_string(), Rat::zero());
    id.rhs.eval(&asn)
}

#[allow(dead_code)]
fn unused_signed_helpers(x: &Rat) -> bool {
    x.is_negative() || x.is_zero() || x.to_f64().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CENTRAL: &str = "sum(k, 0, n, binom(n,k)^2) = binom(2*n,n)";
    const ALT_RECIP: &str = "params m;\nassume m >= 1;\nsum(k, 0, n, (-1)^k * binom(n,k) * m/(m+k)) = 1/binom(m+n,n)";

    #[test]
    fn parses_central_binomial_identity() {
        let id = parse_identity(CENTRAL).unwrap();
        assert_eq!(id.sum_var, "k");
        assert_eq!(id.sum_lo, LinExpr::constant(0));
        assert_eq!(id.sum_hi, LinExpr::var("n"));
        assert_eq!(id.summand.render(), "binom(n,k)^2");
        assert_eq!(id.rhs.render(), "binom(2*n,n)");
    }

    #[test]
    fn parses_parameterized_alternating_identity() {
        let id = parse_identity(ALT_RECIP).unwrap();
        assert_eq!(id.params, vec!["m".to_string()]);
        assert_eq!(id.assumptions.len(), 1);
        assert_eq!(id.summand.render(), "(-1)^k * binom(n,k) * m / (k + m)");
    }

    #[test]
    fn missing_equals_is_a_syntax_error() {
        let e = parse_identity("sum(k, 0, n, binom(n,k))").unwrap_err();
        assert!(e.message.contains("`=`"), "{}", e);
        assert!(e.line >= 1);
    }

    #[test]
    fn sum_var_on_rhs_rejected() {
        let e = parse_identity("sum(k, 0, n, binom(n,k)) = k").unwrap_err();
        assert!(e.message.contains("right-hand side"), "{}", e);
    }

    #[test]
    fn nonlinear_binomial_argument_rejected() {
        let e = parse_identity("sum(k, 0, n, binom(n*n, k)) = 1").unwrap_err();
        assert!(e.message.contains("integer-linear"), "{}", e);
    }

    #[test]
    fn round_trip_is_fixed_point() {
        for src in [CENTRAL, ALT_RECIP] {
            let id = parse_identity(src).unwrap();
            let printed = print_identity(&id);
            let re = parse_identity(&printed).unwrap();
            assert_eq!(id, re, "round-trip of {}", src);
            assert_eq!(printed, print_identity(&re));
        }
    }

    #[test]
    fn whitespace_variants_normalize_identically() {
        let a = parse_identity("sum(k,0,n,binom(n,k)^2)=binom(2*n,n)").unwrap();
        let b = parse_identity("sum( k , 0 , n , binom(n, k)^2 ) = binom(2 * n, n)").unwrap();
        assert_eq!(print_identity(&a), print_identity(&b));
    }

    #[test]
    fn range_shift_preserves_sums() {
        let id = parse_identity("sum(k, 1, n+1, k * binom(n, k-1)) = 1").unwrap();
        let (norm, obs) = range_normalize(&id).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(norm.sum_lo, LinExpr::constant(0));
        assert_eq!(norm.sum_hi, LinExpr::var("n"));
        for n in 0..=8i64 {
            let mut outer = BTreeMap::new();
            outer.insert("n".to_string(), rat_int(n));
            assert_eq!(
                sum_at(&id, &outer).unwrap(),
                sum_at(&norm, &outer).unwrap(),
                "n = {}",
                n
            );
        }
    }

    #[test]
    fn range_already_normalized_is_untouched() {
        let id = parse_identity(CENTRAL).unwrap();
        let (norm, obs) = range_normalize(&id).unwrap();
        assert!(obs.is_empty());
        assert_eq!(id, norm);
    }

    #[test]
    fn range_shift_by_two_with_stretched_bound() {
        let id = parse_identity("sum(k, 2, 2*n, k) = 1").unwrap();
        let (norm, obs) = range_normalize(&id).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(norm.sum_hi, LinExpr::var("n").scale(2).add_const(-2));
        for n in 1..=10i64 {
            let mut outer = BTreeMap::new();
            outer.insert("n".to_string(), rat_int(n));
            assert_eq!(
                sum_at(&id, &outer).unwrap(),
                sum_at(&norm, &outer).unwrap(),
                "n = {}",
                n
            );
        }
    }

    #[test]
    fn parity_split_replaces_recurrence_variable() {
        let id = parse_identity(CENTRAL).unwrap();
        let (even, odd) = split_parity(&id).unwrap();
        assert_eq!(even.case_tag, CaseTag::Even);
        assert_eq!(odd.case_tag, CaseTag::Odd);
        assert_eq!(even.sum_hi, LinExpr::var("n").scale(2));
        assert_eq!(odd.sum_hi, LinExpr::var("n").scale(2).add_const(1));
        // the even branch at n=t matches the original at 2t
        let mut outer = BTreeMap::new();
        outer.insert("n".to_string(), rat_int(3));
        let even_val = sum_at(&even, &outer).unwrap();
        let mut outer6 = BTreeMap::new();
        outer6.insert("n".to_string(), rat_int(6));
        assert_eq!(even_val, sum_at(&id, &outer6).unwrap());
    }
}
