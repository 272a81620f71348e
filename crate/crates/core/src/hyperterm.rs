//! Hypergeometric terms as products of atomic factors (binomials,
//! factorials, powers, polynomials, constants) with symbolically
//! computable shift ratios.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::symcore::{poly_integer_roots, rat_int, Polynomial, Rat, RationalFunction, RootDesc, Vars};

/// Integer-linear expression in the declared variables, e.g. `n - k`,
/// `m + k`, `2*n`. Arguments of binomials, factorials and power exponents
/// must be of this shape for shift ratios to stay rational.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LinExpr {
    pub coeffs: BTreeMap<String, i64>,
    pub constant: i64,
}

impl LinExpr {
    pub fn constant(c: i64) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), 1);
        LinExpr {
            coeffs,
            constant: 0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, var: &str) -> i64 {
        self.coeffs.get(var).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(v.clone()).or_insert(0);
            *e += c;
        }
        out.coeffs.retain(|_, c| *c != 0);
        out.constant += other.constant;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, s: i64) -> Self {
        if s == 0 {
            return Self::constant(0);
        }
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= s;
        }
        out.constant *= s;
        out
    }

    pub fn add_const(&self, c: i64) -> Self {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    /// Substitute `var := var + offset`.
    pub fn shift(&self, var: &str, offset: i64) -> Self {
        let mut out = self.clone();
        out.constant += self.coeff(var) * offset;
        out
    }

    /// Substitute `var := repl`.
    pub fn substitute(&self, var: &str, repl: &LinExpr) -> Self {
        let c = self.coeff(var);
        let mut out = self.clone();
        out.coeffs.remove(var);
        let mut res = out.add(&repl.scale(c));
        res.coeffs.retain(|_, c| *c != 0);
        res
    }

    pub fn eval(&self, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
        let mut acc = Rat::from_integer(BigInt::from(self.constant));
        for (v, c) in &self.coeffs {
            let val = assignment
                .get(v)
                .ok_or_else(|| Error::MissingAssignment(v.clone()))?;
            acc += val * Rat::from_integer(BigInt::from(*c));
        }
        Ok(acc)
    }

    pub fn eval_int(&self, assignment: &BTreeMap<String, Rat>) -> Result<BigInt> {
        let v = self.eval(assignment)?;
        if v.denom().is_one() {
            Ok(v.numer().clone())
        } else {
            Err(Error::Undefined(format!(
                "expression {} is not an integer at the point",
                self.render()
            )))
        }
    }

    pub fn to_poly(&self, vars: &Vars) -> Result<Polynomial> {
        let mut p = Polynomial::constant(vars, rat_int(self.constant));
        for (v, c) in &self.coeffs {
            let pv = Polynomial::var(vars, v)?.scale(&rat_int(*c));
            p = p.add(&pv)?;
        }
        Ok(p)
    }

    pub fn vars_used(&self) -> Vec<String> {
        self.coeffs.keys().cloned().collect()
    }

    /// Display order: recurrence variable and parameters first, summation
    /// variable last, positive terms before negative ones where possible.
    pub fn render(&self) -> String {
        let mut parts: Vec<(i64, String)> = self
            .coeffs
            .iter()
            .map(|(v, c)| (*c, v.clone()))
            .collect();
        // Stable display: positive coefficients first, then negative;
        // within a group keep name order but put single-letter summation
        // names like k after longer context when tied.
        parts.sort_by(|a, b| {
            let pos_a = a.0 > 0;
            let pos_b = b.0 > 0;
            pos_b.cmp(&pos_a).then_with(|| {
                render_rank(&a.1).cmp(&render_rank(&b.1)).then(a.1.cmp(&b.1))
            })
        });
        let mut out = String::new();
        for (c, v) in &parts {
            let mag = c.abs();
            if out.is_empty() {
                if *c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if *c < 0 { "-" } else { "+" });
            }
            if mag == 1 {
                out.push_str(v);
            } else {
                out.push_str(&format!("{}*{}", mag, v));
            }
        }
        if self.constant != 0 || out.is_empty() {
            if out.is_empty() {
                out.push_str(&self.constant.to_string());
            } else if self.constant > 0 {
                out.push_str(&format!("+{}", self.constant));
            } else {
                out.push_str(&format!("-{}", -self.constant));
            }
        }
        out
    }
}

/// n and parameters display before the summation variable k.
fn render_rank(name: &str) -> u8 {
    match name {
        "n" => 0,
        "k" => 2,
        _ => 1,
    }
}

/// Base of a power factor: an exact rational, or an integer-linear
/// expression in parameters only (so that both shift ratios stay rational).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum PowBase {
    Rational(Rat),
    ParamExpr(LinExpr),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FactorKind {
    Binom(LinExpr, LinExpr),
    Factorial(LinExpr),
    Power(PowBase, LinExpr),
    Poly(Polynomial),
    Const(Rat),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Factor {
    pub kind: FactorKind,
    /// Multiplicity; negative for reciprocal factors.
    pub exponent: i64,
}

/// A hypergeometric term: product of factors with an optional
/// (-1)^(linear expression) sign part.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HyperTerm {
    pub factors: Vec<Factor>,
    pub sign_exp: Option<LinExpr>,
    vars: Vars,
}

impl HyperTerm {
    pub fn one(vars: &Vars) -> Self {
        HyperTerm {
            factors: vec![],
            sign_exp: None,
            vars: vars.clone(),
        }
    }

    pub fn from_factor(vars: &Vars, kind: FactorKind, exponent: i64) -> Result<Self> {
        let mut t = Self::one(vars);
        t.push(kind, exponent)?;
        Ok(t)
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    fn push(&mut self, kind: FactorKind, exponent: i64) -> Result<()> {
        if exponent == 0 {
            return Ok(());
        }
        match kind {
            FactorKind::Const(c) => {
                if c.is_zero() {
                    return Err(Error::Invalid("zero constant factor".into()));
                }
                if c.is_one() {
                    return Ok(());
                }
                if c == -Rat::one() {
                    // fold (-1)^e into the sign part
                    self.mul_sign(&LinExpr::constant(exponent));
                    return Ok(());
                }
                if c.is_negative() {
                    self.mul_sign(&LinExpr::constant(exponent));
                    self.push_merge(FactorKind::Const(-c), exponent);
                    return Ok(());
                }
                self.push_merge(FactorKind::Const(c), exponent);
            }
            FactorKind::Power(base, e) => {
                match &base {
                    PowBase::Rational(r) => {
                        if r.is_zero() {
                            return Err(Error::Invalid("zero power base".into()));
                        }
                        if e.is_constant() {
                            // fold into a constant
                            let v = rat_pow(r, e.constant * exponent)?;
                            return self.push(FactorKind::Const(v), 1);
                        }
                        if r.is_one() {
                            return Ok(());
                        }
                        if *r == -Rat::one() {
                            self.mul_sign(&e.scale(exponent));
                            return Ok(());
                        }
                        if r.is_negative() {
                            self.mul_sign(&e.scale(exponent));
                            self.push_merge(
                                FactorKind::Power(PowBase::Rational(-r.clone()), e),
                                exponent,
                            );
                            return Ok(());
                        }
                        self.push_merge(FactorKind::Power(base, e), exponent);
                    }
                    PowBase::ParamExpr(_) => {
                        if e.is_constant() {
                            return Err(Error::NonLinear(
                                "constant exponent on parameter base should be a polynomial factor"
                                    .into(),
                            ));
                        }
                        self.push_merge(FactorKind::Power(base, e), exponent);
                    }
                }
            }
            FactorKind::Poly(p) => {
                if p.is_zero() {
                    return Err(Error::Invalid("zero polynomial factor".into()));
                }
                if let Some(c) = p.as_constant() {
                    return self.push(FactorKind::Const(c), exponent);
                }
                self.push_merge(FactorKind::Poly(p), exponent);
            }
            other => self.push_merge(other, exponent),
        }
        Ok(())
    }

    fn push_merge(&mut self, kind: FactorKind, exponent: i64) {
        for f in &mut self.factors {
            if f.kind == kind {
                f.exponent += exponent;
                self.factors.retain(|f| f.exponent != 0);
                return;
            }
        }
        self.factors.push(Factor { kind, exponent });
    }

    fn mul_sign(&mut self, e: &LinExpr) {
        let cur = self.sign_exp.clone().unwrap_or_else(|| LinExpr::constant(0));
        let mut sum = cur.add(e);
        // exponents of (-1) matter mod 2
        sum.coeffs.retain(|_, c| {
            *c = c.rem_euclid(2);
            *c != 0
        });
        sum.constant = sum.constant.rem_euclid(2);
        self.sign_exp = if sum.is_constant() && sum.constant == 0 {
            None
        } else {
            Some(sum)
        };
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        if let Some(e) = &other.sign_exp {
            out.mul_sign(e);
        }
        for f in &other.factors {
            out.push(f.kind.clone(), f.exponent)?;
        }
        Ok(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        if let Some(e) = &other.sign_exp {
            // (-1)^e inverse is itself
            out.mul_sign(e);
        }
        for f in &other.factors {
            out.push(f.kind.clone(), -f.exponent)?;
        }
        Ok(out)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut out = Self::one(&self.vars);
        if let Some(s) = &self.sign_exp {
            out.mul_sign(&s.scale(e));
        }
        for f in &self.factors {
            out.push(f.kind.clone(), f.exponent * e)?;
        }
        Ok(out)
    }

    pub fn is_constant_one(&self) -> bool {
        self.factors.is_empty() && self.sign_exp.is_none()
    }

    /// True when no factor's ratio depends on the variable.
    pub fn independent_of(&self, var: &str) -> Result<bool> {
        Ok(self.ratio_shift(var)?.is_one())
    }

    /// The exact shift ratio t(var+1)/t(var) as a canonical rational
    /// function. Errors when some factor argument is not integer-linear in
    /// a way that breaks rationality (prevented at construction).
    pub fn ratio_shift(&self, var: &str) -> Result<RationalFunction> {
        self.vars.require(var)?;
        let vars = &self.vars;
        let mut ratio = RationalFunction::one(vars);
        if let Some(e) = &self.sign_exp {
            if e.coeff(var).rem_euclid(2) == 1 {
                ratio = ratio.neg();
            }
        }
        for f in &self.factors {
            let r = factor_ratio(vars, &f.kind, var)?;
            ratio = ratio.mul(&r.pow_i(f.exponent)?)?;
        }
        Ok(ratio)
    }

    /// Numeric evaluation at an exact point. Binomials use the standard
    /// vanishing extension (0 when the bottom index is negative or exceeds
    /// a nonnegative top); bare factorials of negative integers are
    /// undefined and raise.
    pub fn eval(&self, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
        let mut acc = Rat::one();
        if let Some(e) = &self.sign_exp {
            let v = e.eval_int(assignment)?;
            if v.is_odd() {
                acc = -acc;
            }
        }
        for f in &self.factors {
            let base = factor_eval(&f.kind, assignment)?;
            if base.is_zero() && f.exponent < 0 {
                return Err(Error::Pole(format!(
                    "factor {} vanishes at the point",
                    render_factor(&f.kind)
                )));
            }
            acc *= rat_pow(&base, f.exponent)?;
        }
        Ok(acc)
    }

    /// Evaluation with integer values for `fixed` variables while the
    /// parameters stay symbolic; the result is a rational function over
    /// `param_vars`. Used for symbolic base-case computation.
    pub fn eval_symbolic(
        &self,
        fixed: &BTreeMap<String, BigInt>,
        param_vars: &Vars,
    ) -> Result<RationalFunction> {
        let subst = |e: &LinExpr| -> Result<LinExpr> {
            let mut out = e.clone();
            for (v, val) in fixed {
                let c = out.coeff(v);
                if c != 0 {
                    out.coeffs.remove(v);
                    let add = val
                        .to_i64()
                        .ok_or_else(|| Error::Undefined("index out of i64 range".into()))?
                        * c;
                    out.constant += add;
                }
            }
            Ok(out)
        };
        let mut acc = RationalFunction::one(param_vars);
        if let Some(e) = &self.sign_exp {
            let e = subst(e)?;
            if !e.is_constant() {
                return Err(Error::Undefined(
                    "sign exponent stays symbolic at the base point".into(),
                ));
            }
            if e.constant.rem_euclid(2) == 1 {
                acc = acc.neg();
            }
        }
        for f in &self.factors {
            let val = match &f.kind {
                FactorKind::Const(c) => RationalFunction::constant(param_vars, c.clone()),
                FactorKind::Poly(p) => {
                    let mut q = p.clone();
                    for (v, val) in fixed {
                        if q.vars().index_of(v).is_some() {
                            let repl = Polynomial::constant(
                                q.vars(),
                                Rat::from_integer(val.clone()),
                            );
                            q = q.substitute(v, &repl)?;
                        }
                    }
                    // re-express over the parameter variable list
                    reproject(&q, param_vars)?
                }
                FactorKind::Factorial(e) => {
                    let e = subst(e)?;
                    if !e.is_constant() {
                        return Err(Error::Undefined(
                            "factorial argument stays symbolic at the base point".into(),
                        ));
                    }
                    if e.constant < 0 {
                        return Err(Error::Undefined(
                            "factorial of a negative integer".into(),
                        ));
                    }
                    RationalFunction::constant(param_vars, factorial(e.constant))
                }
                FactorKind::Power(base, e) => {
                    let e = subst(e)?;
                    if !e.is_constant() {
                        return Err(Error::Undefined(
                            "power exponent stays symbolic at the base point".into(),
                        ));
                    }
                    match base {
                        PowBase::Rational(r) => {
                            RationalFunction::constant(param_vars, rat_pow(r, e.constant)?)
                        }
                        PowBase::ParamExpr(p) => {
                            let base_rf =
                                RationalFunction::from_poly(subst(p)?.to_poly(param_vars)?);
                            base_rf.pow_i(e.constant)?
                        }
                    }
                }
                FactorKind::Binom(top, bot) => {
                    let top = subst(top)?;
                    let bot = subst(bot)?;
                    if !bot.is_constant() {
                        return Err(Error::Undefined(
                            "binomial bottom index stays symbolic at the base point".into(),
                        ));
                    }
                    let b = bot.constant;
                    if b < 0 {
                        RationalFunction::zero(param_vars)
                    } else {
                        // product formula: prod_{i=0..b-1} (top - i) / b!
                        let mut num = Polynomial::one(param_vars);
                        for i in 0..b {
                            num = num.mul(&top.add_const(-i).to_poly(param_vars)?)?;
                        }
                        RationalFunction::new(
                            num,
                            Polynomial::constant(param_vars, factorial(b)),
                        )?
                    }
                }
            };
            if val.is_zero() && f.exponent < 0 {
                return Err(Error::Pole(format!(
                    "factor {} vanishes at the base point",
                    render_factor(&f.kind)
                )));
            }
            if val.is_zero() {
                return Ok(RationalFunction::zero(param_vars));
            }
            acc = acc.mul(&val.pow_i(f.exponent)?)?;
        }
        Ok(acc)
    }

    /// Substitute `var := var + offset` across all factor arguments.
    pub fn shift_var(&self, var: &str, offset: i64) -> Result<Self> {
        self.substitute_linear(var, &LinExpr::var(var).add_const(offset))
    }

    /// Substitute `var := repl` (integer-linear) across all factors.
    pub fn substitute_linear(&self, var: &str, repl: &LinExpr) -> Result<Self> {
        let vars = &self.vars;
        let repl_poly = repl.to_poly(vars)?;
        let mut out = Self::one(vars);
        if let Some(e) = &self.sign_exp {
            out.mul_sign(&e.substitute(var, repl));
        }
        for f in &self.factors {
            let kind = match &f.kind {
                FactorKind::Binom(t, b) => {
                    FactorKind::Binom(t.substitute(var, repl), b.substitute(var, repl))
                }
                FactorKind::Factorial(e) => FactorKind::Factorial(e.substitute(var, repl)),
                FactorKind::Power(base, e) => {
                    FactorKind::Power(base.clone(), e.substitute(var, repl))
                }
                FactorKind::Poly(p) => FactorKind::Poly(p.substitute(var, &repl_poly)?),
                FactorKind::Const(c) => FactorKind::Const(c.clone()),
            };
            out.push(kind, f.exponent)?;
        }
        Ok(out)
    }

    /// Index constraints under which factors vanish or are undefined inside
    /// the closed range [lo, hi] of the summation variable.
    pub fn term_support(
        &self,
        sum_var: &str,
        lo: &LinExpr,
        hi: &LinExpr,
        assumptions: &[crate::hyperterm::SupportAssumption],
    ) -> Result<Vec<SupportNote>> {
        let mut notes = Vec::new();
        for f in &self.factors {
            match &f.kind {
                FactorKind::Binom(top, bot) => {
                    // vanishes when bot < 0 or bot > top (top >= 0)
                    for (desc, expr) in [
                        ("binomial bottom negative", bot.clone()),
                        ("binomial top minus bottom negative", top.sub(bot)),
                    ] {
                        if let Some(at) =
                            linear_sign_change_in_range(&expr, sum_var, lo, hi, assumptions)
                        {
                            notes.push(SupportNote {
                                factor: render_factor(&f.kind),
                                kind: if f.exponent > 0 {
                                    SupportKind::VanishesAt
                                } else {
                                    SupportKind::PoleAt
                                },
                                condition: format!("{} ({})", at, desc),
                            });
                        }
                    }
                }
                FactorKind::Factorial(arg) => {
                    if let Some(at) =
                        linear_sign_change_in_range(arg, sum_var, lo, hi, assumptions)
                    {
                        notes.push(SupportNote {
                            factor: render_factor(&f.kind),
                            kind: SupportKind::UndefinedAt,
                            condition: format!("{} (negative factorial argument)", at),
                        });
                    }
                }
                FactorKind::Poly(p) => {
                    let roots = poly_integer_roots(p, sum_var, None)?;
                    for r in roots {
                        let kind = if f.exponent < 0 {
                            SupportKind::PoleAt
                        } else {
                            SupportKind::VanishesAt
                        };
                        match r {
                            RootDesc::Integer(v) => {
                                match const_in_range(&v, lo, hi, assumptions) {
                                    RangeStatus::Inside | RangeStatus::Unknown => {
                                        notes.push(SupportNote {
                                            factor: render_factor(&f.kind),
                                            kind,
                                            condition: format!("{} = {}", sum_var, v),
                                        });
                                    }
                                    RangeStatus::Outside => {}
                                }
                            }
                            RootDesc::Linear { expr, den } => {
                                let status =
                                    linear_root_in_range(&expr, &den, lo, hi, assumptions);
                                if status != RangeStatus::Outside {
                                    let cond = if den.is_one() {
                                        format!("{} = {}", sum_var, expr.render())
                                    } else {
                                        format!(
                                            "{} = ({})/{} (integral only under a divisibility condition)",
                                            sum_var,
                                            expr.render(),
                                            den
                                        )
                                    };
                                    let cond = if status == RangeStatus::Unknown {
                                        format!("conditional: {}", cond)
                                    } else {
                                        cond
                                    };
                                    notes.push(SupportNote {
                                        factor: render_factor(&f.kind),
                                        kind,
                                        condition: cond,
                                    });
                                }
                            }
                            RootDesc::Unresolved(p) => {
                                notes.push(SupportNote {
                                    factor: render_factor(&f.kind),
                                    kind,
                                    condition: format!(
                                        "unresolved factor {} may vanish in range",
                                        p.render()
                                    ),
                                });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(notes)
    }

    /// Canonical text, e.g. `binom(n,k)^2 / binom(2*n,n)`.
    pub fn render(&self) -> String {
        let mut num: Vec<String> = Vec::new();
        let mut den: Vec<String> = Vec::new();
        if let Some(e) = &self.sign_exp {
            num.push(format!("(-1)^{}", wrap_exp(&e.render())));
        }
        let mut sorted: Vec<&Factor> = self.factors.iter().collect();
        sorted.sort_by_key(|f| (factor_rank(&f.kind), render_factor(&f.kind)));
        for f in &sorted {
            let base = render_factor(&f.kind);
            let mag = f.exponent.unsigned_abs();
            let txt = if mag == 1 {
                base
            } else {
                format!("{}^{}", base, mag)
            };
            if f.exponent > 0 {
                num.push(txt);
            } else {
                den.push(txt);
            }
        }
        let mut out = if num.is_empty() {
            "1".to_string()
        } else {
            num.join(" * ")
        };
        for d in den {
            out.push_str(&format!(" / {}", d));
        }
        out
    }
}

/// Assumption usable by the support checker: `var >= bound`.
#[derive(Clone, Debug)]
pub struct SupportAssumption {
    pub var: String,
    pub lower: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportKind {
    VanishesAt,
    PoleAt,
    UndefinedAt,
}

#[derive(Clone, Debug)]
pub struct SupportNote {
    pub factor: String,
    pub kind: SupportKind,
    pub condition: String,
}

impl fmt::Display for SupportNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            SupportKind::VanishesAt => "vanishes",
            SupportKind::PoleAt => "pole",
            SupportKind::UndefinedAt => "undefined",
        };
        write!(f, "{}: {} at {}", self.factor, k, self.condition)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RangeStatus {
    Inside,
    Outside,
    Unknown,
}

/// Interval bounds for a linear expression given `var >= lower` assumptions
/// (n and the summation variable are nonnegative by convention).
fn lin_bounds(e: &LinExpr, assumptions: &[SupportAssumption]) -> (Option<i64>, Option<i64>) {
    let mut lo = Some(e.constant);
    let mut hi = Some(e.constant);
    for (v, c) in &e.coeffs {
        let lower = assumptions
            .iter()
            .find(|a| &a.var == v)
            .map(|a| a.lower)
            .or_else(|| {
                if v == "n" || v == "k" {
                    Some(0)
                } else {
                    None
                }
            });
        match (lower, *c) {
            (Some(l), c) if c > 0 => {
                lo = lo.map(|x| x + c * l);
                hi = None;
            }
            (Some(l), c) if c < 0 => {
                hi = hi.map(|x| x + c * l);
                lo = None;
            }
            _ => {
                lo = None;
                hi = None;
            }
        }
    }
    (lo, hi)
}

/// Whether the linear expression takes a negative value at some integer of
/// the closed range while nonnegative elsewhere (a support boundary): we
/// report the first index where expr < 0 can occur, conservatively.
fn linear_sign_change_in_range(
    expr: &LinExpr,
    sum_var: &str,
    lo: &LinExpr,
    hi: &LinExpr,
    assumptions: &[SupportAssumption],
) -> Option<String> {
    let c = expr.coeff(sum_var);
    if c == 0 {
        let (lb, _) = lin_bounds(expr, assumptions);
        if lb.map(|l| l >= 0).unwrap_or(false) {
            return None;
        }
        return Some(format!("{} may be negative in range", expr.render()));
    }
    // expr = c*k + rest; negative when k beyond -rest/c
    // value at the range end that minimizes expr
    let at_end = if c > 0 { lo } else { hi };
    let mut value_at_end = expr.clone();
    let repl = at_end.clone();
    value_at_end = value_at_end.substitute(sum_var, &repl);
    let (lb, _) = lin_bounds(&value_at_end, assumptions);
    if lb.map(|l| l >= 0).unwrap_or(false) {
        return None;
    }
    Some(format!(
        "{} < 0 for {} near {}",
        expr.render(),
        sum_var,
        at_end.render()
    ))
}

fn const_in_range(
    v: &BigInt,
    lo: &LinExpr,
    hi: &LinExpr,
    assumptions: &[SupportAssumption],
) -> RangeStatus {
    let v = match v.to_i64() {
        Some(v) => v,
        None => return RangeStatus::Unknown,
    };
    // v < lo or v > hi proves outside
    let lo_minus = lo.scale(-1).add_const(v); // v - lo
    let (lmin, lmax) = lin_bounds(&lo_minus, assumptions);
    if lmax.map(|x| x < 0).unwrap_or(false) {
        return RangeStatus::Outside; // v < lo always
    }
    let hi_minus = hi.scale(-1).add_const(v); // v - hi
    let (hmin, _) = lin_bounds(&hi_minus, assumptions);
    if hmin.map(|x| x > 0).unwrap_or(false) {
        return RangeStatus::Outside; // v > hi always
    }
    if lmin.map(|x| x >= 0).unwrap_or(false) && hi_minus_le_zero(hi, v, assumptions) {
        return RangeStatus::Inside;
    }
    RangeStatus::Unknown
}

fn hi_minus_le_zero(hi: &LinExpr, v: i64, assumptions: &[SupportAssumption]) -> bool {
    let hi_minus = hi.scale(-1).add_const(v);
    let (_, hmax) = lin_bounds(&hi_minus, assumptions);
    hmax.map(|x| x <= 0).unwrap_or(false)
}

fn linear_root_in_range(
    expr: &Polynomial,
    den: &BigInt,
    lo: &LinExpr,
    hi: &LinExpr,
    assumptions: &[SupportAssumption],
) -> RangeStatus {
    // root = expr/den; prove den*lo - expr > 0 (root < lo) or
    // expr - den*hi > 0 (root > hi)
    let lin = match poly_to_linexpr(expr) {
        Some(l) => l,
        None => return RangeStatus::Unknown,
    };
    let d = match den.to_i64() {
        Some(d) => d,
        None => return RangeStatus::Unknown,
    };
    let below = lo.scale(d).sub(&lin); // den*lo - expr
    let (bmin, _) = lin_bounds(&below, assumptions);
    if bmin.map(|x| x > 0).unwrap_or(false) {
        return RangeStatus::Outside;
    }
    let above = lin.sub(&hi.scale(d)); // expr - den*hi
    let (amin, _) = lin_bounds(&above, assumptions);
    if amin.map(|x| x > 0).unwrap_or(false) {
        return RangeStatus::Outside;
    }
    RangeStatus::Unknown
}

pub fn poly_to_linexpr(p: &Polynomial) -> Option<LinExpr> {
    if p.total_degree() > 1 {
        return None;
    }
    let mut out = LinExpr::constant(0);
    for (m, c) in p.terms() {
        if !c.denom().is_one() {
            return None;
        }
        let cv = c.numer().to_i64()?;
        if m.total_degree() == 0 {
            out.constant += cv;
        } else {
            let vi = m.0.iter().position(|&e| e == 1)?;
            *out.coeffs.entry(p.vars().names()[vi].clone()).or_insert(0) += cv;
        }
    }
    out.coeffs.retain(|_, c| *c != 0);
    Some(out)
}

fn factor_rank(kind: &FactorKind) -> u8 {
    match kind {
        FactorKind::Const(_) => 0,
        FactorKind::Binom(_, _) => 1,
        FactorKind::Factorial(_) => 2,
        FactorKind::Power(_, _) => 3,
        FactorKind::Poly(_) => 4,
    }
}

pub fn render_factor(kind: &FactorKind) -> String {
    match kind {
        FactorKind::Binom(t, b) => format!("binom({},{})", t.render(), b.render()),
        FactorKind::Factorial(e) => format!("fact({})", e.render()),
        FactorKind::Power(base, e) => {
            let b = match base {
                PowBase::Rational(r) => crate::symcore::render_rat(r),
                PowBase::ParamExpr(p) => format!("({})", p.render()),
            };
            format!("{}^{}", b, wrap_exp(&e.render()))
        }
        FactorKind::Poly(p) => {
            if p.num_terms() > 1 {
                format!("({})", p.render())
            } else {
                p.render()
            }
        }
        FactorKind::Const(c) => crate::symcore::render_rat(c),
    }
}

fn wrap_exp(e: &str) -> String {
    if e.len() == 1 || e.chars().all(|c| c.is_ascii_alphanumeric()) {
        e.to_string()
    } else {
        format!("({})", e)
    }
}

/// Re-express a polynomial over a different variable list; errors when a
/// variable with positive degree is missing from the target list.
fn reproject(p: &Polynomial, target: &Vars) -> Result<RationalFunction> {
    let mut out = Polynomial::zero(target);
    for (m, c) in p.terms() {
        let mut exps = vec![0u32; target.len()];
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                let name = &p.vars().names()[i];
                match target.index_of(name) {
                    Some(j) => exps[j] = e,
                    None => return Err(Error::UnknownVariable(name.clone())),
                }
            }
        }
        out = out.add(&Polynomial::from_terms(target, vec![(exps, c.clone())])?)?;
    }
    Ok(RationalFunction::from_poly(out))
}

/// (x+d)! / x! as a rational function of the linear argument x.
fn factorial_ratio(vars: &Vars, x: &LinExpr, d: i64) -> Result<RationalFunction> {
    let mut out = RationalFunction::one(vars);
    if d >= 0 {
        for i in 1..=d {
            let t = RationalFunction::from_poly(x.add_const(i).to_poly(vars)?);
            out = out.mul(&t)?;
        }
    } else {
        for i in 0..(-d) {
            let t = RationalFunction::from_poly(x.add_const(-i).to_poly(vars)?);
            out = out.div(&t)?;
        }
    }
    Ok(out)
}

fn factor_ratio(vars: &Vars, kind: &FactorKind, var: &str) -> Result<RationalFunction> {
    match kind {
        FactorKind::Const(_) => Ok(RationalFunction::one(vars)),
        FactorKind::Poly(p) => {
            RationalFunction::new(p.shift(var, 1)?, p.clone())
        }
        FactorKind::Factorial(e) => factorial_ratio(vars, e, e.coeff(var)),
        FactorKind::Power(base, e) => {
            let d = e.coeff(var);
            match base {
                PowBase::Rational(r) => Ok(RationalFunction::constant(vars, rat_pow(r, d)?)),
                PowBase::ParamExpr(p) => {
                    if p.coeff(var) != 0 {
                        return Err(Error::NonLinear(format!(
                            "power base {} depends on the shifted variable",
                            p.render()
                        )));
                    }
                    RationalFunction::from_poly(p.to_poly(vars)?).pow_i(d)
                }
            }
        }
        FactorKind::Binom(top, bot) => {
            // C(top+a, bot+b)/C(top, bot)
            //   = [(top+a)!/top!] * [bot!/(bot+b)!] * [(top-bot)!/(top+a-bot-b)!]
            let a = top.coeff(var);
            let b = bot.coeff(var);
            let r1 = factorial_ratio(vars, top, a)?;
            let r2 = factorial_ratio(vars, bot, b)?.recip()?;
            let tmb = top.sub(bot);
            let r3 = factorial_ratio(vars, &tmb, a - b)?.recip()?;
            r1.mul(&r2)?.mul(&r3)
        }
    }
}

fn factor_eval(kind: &FactorKind, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
    match kind {
        FactorKind::Const(c) => Ok(c.clone()),
        FactorKind::Poly(p) => p.eval(assignment),
        FactorKind::Factorial(e) => {
            let v = e.eval_int(assignment)?;
            if v.is_negative() {
                return Err(Error::Undefined(format!(
                    "factorial of negative integer {}",
                    v
                )));
            }
            Ok(Rat::from_integer(factorial_big(&v)))
        }
        FactorKind::Power(base, e) => {
            let d = e.eval_int(assignment)?;
            let d = d
                .to_i64()
                .ok_or_else(|| Error::Undefined("exponent out of range".into()))?;
            let b = match base {
                PowBase::Rational(r) => r.clone(),
                PowBase::ParamExpr(p) => p.eval(assignment)?,
            };
            rat_pow(&b, d)
        }
        FactorKind::Binom(top, bot) => {
            let t = top.eval_int(assignment)?;
            let b = bot.eval_int(assignment)?;
            Ok(Rat::from_integer(binom_big(&t, &b)))
        }
    }
}

/// Generalized binomial: 0 for negative bottom; for nonnegative bottom the
/// falling-product formula, which vanishes automatically when 0 <= top < bot.
pub fn binom_big(top: &BigInt, bot: &BigInt) -> BigInt {
    if bot.is_negative() {
        return BigInt::zero();
    }
    let b = bot.to_u64().expect("binomial bottom fits u64");
    let mut num = BigInt::one();
    for i in 0..b {
        num *= top - BigInt::from(i);
    }
    let mut den = BigInt::one();
    for i in 1..=b {
        den *= BigInt::from(i);
    }
    num / den
}

pub fn factorial_big(x: &BigInt) -> BigInt {
    let mut acc = BigInt::one();
    let n = x.to_u64().expect("factorial argument fits u64");
    for i in 1..=n {
        acc *= BigInt::from(i);
    }
    acc
}

fn factorial(x: i64) -> Rat {
    Rat::from_integer(factorial_big(&BigInt::from(x)))
}

pub fn rat_pow(base: &Rat, e: i64) -> Result<Rat> {
    if base.is_zero() {
        if e < 0 {
            return Err(Error::Pole("0 raised to a negative power".into()));
        }
        return Ok(if e == 0 { Rat::one() } else { Rat::zero() });
    }
    let mut acc = Rat::one();
    for _ in 0..e.unsigned_abs() {
        acc *= base;
    }
    if e < 0 {
        acc = acc.recip();
    }
    Ok(acc)
}

pub fn term_mul(a: &HyperTerm, b: &HyperTerm) -> Result<HyperTerm> {
    a.mul(b)
}

pub fn term_div(a: &HyperTerm, b: &HyperTerm) -> Result<HyperTerm> {
    a.div(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::rat;

    fn vars() -> Vars {
        Vars::new(vec!["k", "n", "m"])
    }

    fn binom(vars: &Vars, t: LinExpr, b: LinExpr) -> HyperTerm {
        HyperTerm::from_factor(vars, FactorKind::Binom(t, b), 1).unwrap()
    }

    fn rf_of(vars: &Vars, num: &[(i64, &[u32])], den: &[(i64, &[u32])]) -> RationalFunction {
        let p = |s: &[(i64, &[u32])]| {
            Polynomial::from_terms(
                vars,
                s.iter().map(|(c, e)| (e.to_vec(), rat_int(*c))).collect(),
            )
            .unwrap()
        };
        RationalFunction::new(p(num), p(den)).unwrap()
    }

    #[test]
    fn choose_ratio_in_k() {
        let v = vars();
        let t = binom(&v, LinExpr::var("n"), LinExpr::var("k"));
        let r = t.ratio_shift("k").unwrap();
        // (n-k)/(k+1)
        let expect = rf_of(
            &v,
            &[(1, &[0, 1, 0]), (-1, &[1, 0, 0])],
            &[(1, &[1, 0, 0]), (1, &[0, 0, 0])],
        );
        assert_eq!(r, expect);
    }

    #[test]
    fn alternating_summand_ratio_matches_closed_form() {
        // A(n,k) = (-1)^k binom(n,k) m/(m+k); k-ratio -(n-k)(k+m)/((k+m+1)(k+1))
        let v = vars();
        let mut t = binom(&v, LinExpr::var("n"), LinExpr::var("k"));
        t = t
            .mul(
                &HyperTerm::from_factor(
                    &v,
                    FactorKind::Power(PowBase::Rational(-Rat::one()), LinExpr::var("k")),
                    1,
                )
                .unwrap(),
            )
            .unwrap();
        let m_poly = Polynomial::var(&v, "m").unwrap();
        let mk = m_poly
            .add(&Polynomial::var(&v, "k").unwrap())
            .unwrap();
        t = t
            .mul(&HyperTerm::from_factor(&v, FactorKind::Poly(m_poly), 1).unwrap())
            .unwrap();
        t = t
            .mul(&HyperTerm::from_factor(&v, FactorKind::Poly(mk), -1).unwrap())
            .unwrap();
        let r = t.ratio_shift("k").unwrap();
        // -(n-k)(k+m) / ((k+m+1)(k+1))
        let num = &[
            (-1i64, &[0u32, 1, 0][..]), // -n ... expand -(n-k)(k+m) = -(nk+nm -k^2 -km)
        ];
        let _ = num;
        let vkn = &v;
        let nk = rf_of(
            vkn,
            &[(1, &[0, 1, 0]), (-1, &[1, 0, 0])],
            &[(1, &[0, 0, 0])],
        );
        let km = rf_of(
            vkn,
            &[(1, &[1, 0, 0]), (1, &[0, 0, 1])],
            &[(1, &[0, 0, 0])],
        );
        let km1 = rf_of(
            vkn,
            &[(1, &[1, 0, 0]), (1, &[0, 0, 1]), (1, &[0, 0, 0])],
            &[(1, &[0, 0, 0])],
        );
        let k1 = rf_of(vkn, &[(1, &[1, 0, 0]), (1, &[0, 0, 0])], &[(1, &[0, 0, 0])]);
        let expect = nk
            .mul(&km)
            .unwrap()
            .neg()
            .div(&km1.mul(&k1).unwrap())
            .unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn rhs_reciprocal_choose_ratio_in_n() {
        // B(n) = 1/binom(m+n, n); n-ratio (n+1)/(n+m+1)
        let v = vars();
        let t = HyperTerm::from_factor(
            &v,
            FactorKind::Binom(
                LinExpr::var("m").add(&LinExpr::var("n")),
                LinExpr::var("n"),
            ),
            -1,
        )
        .unwrap();
        let r = t.ratio_shift("n").unwrap();
        let expect = rf_of(
            &v,
            &[(1, &[0, 1, 0]), (1, &[0, 0, 0])],
            &[(1, &[0, 1, 0]), (1, &[0, 0, 1]), (1, &[0, 0, 0])],
        );
        assert_eq!(r, expect);
    }

    #[test]
    fn sign_ratio_is_minus_one() {
        let v = vars();
        let t = HyperTerm::from_factor(
            &v,
            FactorKind::Power(PowBase::Rational(-Rat::one()), LinExpr::var("k")),
            1,
        )
        .unwrap();
        let r = t.ratio_shift("k").unwrap();
        assert_eq!(r, RationalFunction::constant(&v, rat_int(-1)));
        // and in n it is constant 1
        assert!(t.ratio_shift("n").unwrap().is_one());
    }

    #[test]
    fn self_division_gives_one() {
        let v = vars();
        let t = binom(&v, LinExpr::var("n"), LinExpr::var("k"));
        assert!(t.div(&t).unwrap().is_constant_one());
    }

    #[test]
    fn ratio_is_multiplicative() {
        let v = vars();
        let a = binom(&v, LinExpr::var("n"), LinExpr::var("k"));
        let b = HyperTerm::from_factor(
            &v,
            FactorKind::Power(PowBase::Rational(rat_int(2)), LinExpr::var("k")),
            1,
        )
        .unwrap();
        let ab = a.mul(&b).unwrap();
        let lhs = ab.ratio_shift("k").unwrap();
        let rhs = a
            .ratio_shift("k")
            .unwrap()
            .mul(&b.ratio_shift("k").unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn ratio_consistency_with_numeric_quotient() {
        let v = vars();
        // t = binom(n,k)^2 / binom(2n,n)
        let t = binom(&v, LinExpr::var("n"), LinExpr::var("k"))
            .pow(2)
            .unwrap()
            .div(&binom(&v, LinExpr::var("n").scale(2), LinExpr::var("n")))
            .unwrap();
        for var in ["k", "n"] {
            let ratio = t.ratio_shift(var).unwrap();
            for (nv, kv) in [(4i64, 1i64), (5, 2), (6, 3), (7, 0)] {
                let mut asn = BTreeMap::new();
                asn.insert("k".to_string(), rat_int(kv));
                asn.insert("n".to_string(), rat_int(nv));
                asn.insert("m".to_string(), rat_int(1));
                let here = t.eval(&asn).unwrap();
                let mut shifted = asn.clone();
                let tgt = shifted.get_mut(var).unwrap();
                *tgt += Rat::one();
                let there = t.eval(&shifted).unwrap();
                if here.is_zero() {
                    continue;
                }
                assert_eq!(ratio.eval(&asn).unwrap(), there / here, "var {}", var);
            }
        }
    }

    #[test]
    fn eval_uses_vanishing_binomial_extension() {
        let v = vars();
        let t = binom(&v, LinExpr::var("n"), LinExpr::var("k"));
        let mut asn = BTreeMap::new();
        asn.insert("k".to_string(), rat_int(5));
        asn.insert("n".to_string(), rat_int(3));
        asn.insert("m".to_string(), rat_int(1));
        assert_eq!(t.eval(&asn).unwrap(), Rat::zero());
        // bare factorial of a negative argument raises
        let f = HyperTerm::from_factor(
            &v,
            FactorKind::Factorial(LinExpr::var("n").add_const(-5)),
            1,
        )
        .unwrap();
        assert!(matches!(f.eval(&asn), Err(Error::Undefined(_))));
    }

    #[test]
    fn support_notes_for_binomial_past_upper_bound() {
        let v = vars();
        let t = binom(&v, LinExpr::var("n"), LinExpr::var("k"));
        // over [0, n]: nothing vanishes inside
        let notes = t
            .term_support("k", &LinExpr::constant(0), &LinExpr::var("n"), &[])
            .unwrap();
        assert!(notes.is_empty(), "{:?}", notes);
        // over [0, n+1]: vanishes at k = n+1
        let notes = t
            .term_support(
                "k",
                &LinExpr::constant(0),
                &LinExpr::var("n").add_const(1),
                &[],
            )
            .unwrap();
        assert_eq!(notes.len(), 1);
        assert_eq!(notes[0].kind, SupportKind::VanishesAt);
    }

    #[test]
    fn conditional_pole_depends_on_assumption() {
        let v = vars();
        // 1/(m+k) over k in [0, n]
        let mk = Polynomial::var(&v, "m")
            .unwrap()
            .add(&Polynomial::var(&v, "k").unwrap())
            .unwrap();
        let t = HyperTerm::from_factor(&v, FactorKind::Poly(mk), -1).unwrap();
        let with = t
            .term_support(
                "k",
                &LinExpr::constant(0),
                &LinExpr::var("n"),
                &[SupportAssumption {
                    var: "m".into(),
                    lower: 1,
                }],
            )
            .unwrap();
        assert!(with.is_empty(), "{:?}", with);
        let without = t
            .term_support("k", &LinExpr::constant(0), &LinExpr::var("n"), &[])
            .unwrap();
        assert_eq!(without.len(), 1);
        assert_eq!(without[0].kind, SupportKind::PoleAt);
    }

    #[test]
    fn canonical_rendering() {
        let v = vars();
        let t = binom(&v, LinExpr::var("n"), LinExpr::var("k"))
            .pow(2)
            .unwrap()
            .div(&binom(&v, LinExpr::var("n").scale(2), LinExpr::var("n")))
            .unwrap();
        assert_eq!(t.render(), "binom(n,k)^2 / binom(2*n,n)");
        let half = HyperTerm::from_factor(
            &v,
            FactorKind::Const(rat(3, 2)),
            1,
        )
        .unwrap();
        assert_eq!(half.render(), "3/2");
    }
}
