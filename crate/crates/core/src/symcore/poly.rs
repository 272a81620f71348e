//! Sparse multivariate polynomials over exact rationals.
//!
//! Terms are stored in a BTreeMap keyed by monomial under graded-lex order,
//! so the last entry is the leading term and iteration order is canonical.
//! The variable list is fixed per polynomial; arithmetic requires both
//! operands to share it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Ordered variable list shared by all polynomials of one computation.
/// Convention: the summation variable comes first, then the recurrence
/// variable, then parameters.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vars(Arc<Vec<String>>);

impl Vars {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Self {
        Vars(Arc::new(names.into_iter().map(Into::into).collect()))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

impl fmt::Debug for Vars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vars({})", self.0.join(","))
    }
}

/// Exponent vector under graded-lex order: compare total degree first,
/// then exponents left to right.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    vars: Vars,
    terms: BTreeMap<Mono, Rat>,
}

impl Polynomial {
    pub fn zero(vars: &Vars) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rat) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Mono::one(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rat::one())
    }

    pub fn var(vars: &Vars, name: &str) -> Result<Self> {
        let idx = vars.require(name)?;
        let mut exps = vec![0u32; vars.len()];
        exps[idx] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(Mono(exps), Rat::one());
        Ok(p)
    }

    pub fn from_terms(vars: &Vars, terms: Vec<(Vec<u32>, Rat)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (exps, c) in terms {
            if exps.len() != vars.len() {
                return Err(Error::Invalid(format!(
                    "exponent vector length {} != variable count {}",
                    exps.len(),
                    vars.len()
                )));
            }
            p.add_term(Mono(exps), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// Some(c) iff the polynomial is a constant (including zero).
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.total_degree() == 0 {
                return Some(c.clone());
            }
        }
        None
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::VarMismatch(
                self.vars.names().join(","),
                other.vars.names().join(","),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = Self::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(&self.vars);
        for _ in 0..e {
            out = out.mul(self).expect("same vars");
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(Mono::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var_idx: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var_idx]).max().unwrap_or(0)
    }

    /// The coefficient of var^pow, as a polynomial over the same variable
    /// list (the chosen variable appears with exponent zero).
    pub fn coeff_in(&self, var_idx: usize, pow: u32) -> Self {
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.0[var_idx] == pow {
                let mut e = m.0.clone();
                e[var_idx] = 0;
                out.add_term(Mono(e), c.clone());
            }
        }
        out
    }

    /// Leading (monomial, coefficient) under graded-lex; None for zero.
    pub fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rat {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Rat::zero)
    }

    /// Leading coefficient when viewed as a univariate polynomial in the
    /// given variable (a polynomial in the remaining variables).
    pub fn leading_coeff_in(&self, var_idx: usize) -> Self {
        self.coeff_in(var_idx, self.degree_in(var_idx))
    }

    /// Divide by the graded-lex leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    pub fn eval(&self, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
        let point: Vec<Rat> = self
            .vars
            .names()
            .iter()
            .map(|v| {
                assignment
                    .get(v)
                    .cloned()
                    .ok_or_else(|| Error::MissingAssignment(v.clone()))
            })
            .collect::<Result<_>>()?;
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Substitute `var := var + offset`.
    pub fn shift(&self, var: &str, offset: i64) -> Result<Self> {
        self.vars.require(var)?;
        if offset == 0 {
            return Ok(self.clone());
        }
        let repl = Self::var(&self.vars, var)?
            .add(&Self::constant(&self.vars, rat_int(offset)))?;
        self.substitute(var, &repl)
    }

    /// Substitute `var := replacement` (replacement over the same vars).
    pub fn substitute(&self, var: &str, replacement: &Self) -> Result<Self> {
        self.check_vars(replacement)?;
        let idx = self.vars.require(var)?;
        let max_deg = self.degree_in(idx);
        // Horner over powers of the substituted variable.
        let mut powers: Vec<Polynomial> = Vec::with_capacity(max_deg as usize + 1);
        powers.push(Self::one(&self.vars));
        for e in 1..=max_deg {
            let prev = powers[(e - 1) as usize].clone();
            powers.push(prev.mul(replacement)?);
        }
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[idx];
            let mut rest = m.0.clone();
            rest[idx] = 0;
            let mut base = Self::zero(&self.vars);
            base.add_term(Mono(rest), c.clone());
            out = out.add(&base.mul(&powers[e as usize])?)?;
        }
        Ok(out)
    }

    /// Exact multivariate division; None when `divisor` does not divide.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        if self.vars != divisor.vars || divisor.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.vars);
        let (dm, dc) = {
            let (m, c) = divisor.leading().unwrap();
            (m.clone(), c.clone())
        };
        while !rem.is_zero() {
            let (lm, lc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            if !dm.divides(&lm) {
                return None;
            }
            let qm = lm.div(&dm);
            let qc = lc / &dc;
            let mut qterm = Self::zero(&self.vars);
            qterm.add_term(qm, qc);
            rem = rem.sub(&qterm.mul(divisor).ok()?).ok()?;
            quot = quot.add(&qterm).ok()?;
        }
        Some(quot)
    }

    /// Pseudo-division in one variable: lc(d)^(deg f − deg d + 1) · f = q·d + r
    /// with deg_var(r) < deg_var(d). Returns (q, r).
    pub fn pseudo_div_rem(&self, divisor: &Self, var_idx: usize) -> Result<(Self, Self)> {
        self.check_vars(divisor)?;
        if divisor.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let dd = divisor.degree_in(var_idx);
        let lc_d = divisor.leading_coeff_in(var_idx);
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.vars);
        let df = self.degree_in(var_idx);
        if df < dd || self.is_zero() {
            // lc^(0) would need df − dd + 1 steps; with df < dd the literal
            // convention is r = lc^(df−dd+1)·f, but callers only need f here.
            return Ok((quot, rem));
        }
        let mut steps = df - dd + 1;
        while !rem.is_zero() && rem.degree_in(var_idx) >= dd {
            let dr = rem.degree_in(var_idx);
            let lc_r = rem.leading_coeff_in(var_idx);
            let mut shift_mono = vec![0u32; self.vars.len()];
            shift_mono[var_idx] = dr - dd;
            let mut xpow = Self::zero(&self.vars);
            xpow.add_term(Mono(shift_mono), Rat::one());
            let t = lc_r.mul(&xpow)?;
            quot = quot.mul(&lc_d)?.add(&t)?;
            rem = rem.mul(&lc_d)?.sub(&t.mul(divisor)?)?;
            steps -= 1;
        }
        // Pad remaining scalings so the pseudo-division identity holds.
        for _ in 0..steps {
            quot = quot.mul(&lc_d)?;
            rem = rem.mul(&lc_d)?;
        }
        Ok((quot, rem))
    }

    /// Rational content c and primitive part p with integer coprime
    /// coefficients and positive graded-lex leading coefficient, so that
    /// self = c · p. Zero returns (0, 0).
    pub fn integer_primitive(&self) -> (Rat, Self) {
        if self.is_zero() {
            return (Rat::zero(), self.clone());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(&c.numer().abs());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        let lead_sign_neg = self.leading_coeff().is_negative();
        if lead_sign_neg {
            content = -content;
        }
        let prim = self.scale(&content.recip());
        (content, prim)
    }

    /// Variables that actually occur with positive degree.
    pub fn present_vars(&self) -> Vec<usize> {
        let n = self.vars.len();
        let mut present = vec![false; n];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    present[i] = true;
                }
            }
        }
        (0..n).filter(|&i| present[i]).collect()
    }

    pub fn depends_on(&self, var_idx: usize) -> bool {
        self.terms.keys().any(|m| m.0[var_idx] > 0)
    }

    /// Canonical text: terms in descending graded-lex order.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.total_degree() == 0 {
                parts.push(render_rat(&mag));
            }
            for (vi, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    parts.push(self.vars.names()[vi].clone());
                } else if e > 1 {
                    parts.push(format!("{}^{}", self.vars.names()[vi], e));
                }
            }
            out.push_str(&parts.join("*"));
        }
        out
    }
}

pub fn render_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kn() -> Vars {
        Vars::new(vec!["k", "n"])
    }

    fn p(vars: &Vars, s: &[(i64, &[u32])]) -> Polynomial {
        Polynomial::from_terms(
            vars,
            s.iter()
                .map(|(c, e)| (e.to_vec(), rat_int(*c)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cancellation_yields_exact_zero_coeffs() {
        let vars = kn();
        // (n - k + 1) + (k - 1) = n
        let a = p(&vars, &[(1, &[0, 1]), (-1, &[1, 0]), (1, &[0, 0])]);
        let b = p(&vars, &[(1, &[1, 0]), (-1, &[0, 0])]);
        let sum = a.add(&b).unwrap();
        assert_eq!(sum, p(&vars, &[(1, &[0, 1])]));
        assert_eq!(sum.num_terms(), 1);
    }

    #[test]
    fn mul_by_zero_absorbs() {
        let vars = kn();
        let a = p(&vars, &[(3, &[2, 1]), (1, &[0, 0])]);
        let z = Polynomial::zero(&vars);
        assert!(a.mul(&z).unwrap().is_zero());
    }

    #[test]
    fn var_mismatch_is_reported() {
        let a = Polynomial::one(&kn());
        let b = Polynomial::one(&Vars::new(vec!["k", "n", "m"]));
        assert!(matches!(a.add(&b), Err(Error::VarMismatch(_, _))));
    }

    #[test]
    fn grlex_leading_term() {
        let vars = kn();
        // 2k^3 - 3k^2 n - 3k^2: leading is k^3 under grlex(k, n)
        let q = p(&vars, &[(2, &[3, 0]), (-3, &[2, 1]), (-3, &[2, 0])]);
        let (m, c) = q.leading().unwrap();
        assert_eq!(m.0, vec![3, 0]);
        assert_eq!(c, &rat_int(2));
        assert_eq!(q.render(), "2*k^3 - 3*k^2*n - 3*k^2");
    }

    #[test]
    fn shift_substitutes_linearly() {
        let vars = kn();
        // n - k + 1 shifted in n by +1 -> n - k + 2
        let a = p(&vars, &[(1, &[0, 1]), (-1, &[1, 0]), (1, &[0, 0])]);
        let shifted = a.shift("n", 1).unwrap();
        assert_eq!(
            shifted,
            p(&vars, &[(1, &[0, 1]), (-1, &[1, 0]), (2, &[0, 0])])
        );
        let back = shifted.shift("n", -1).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn exact_division_round_trip() {
        let vars = kn();
        let a = p(&vars, &[(1, &[1, 0]), (1, &[0, 0])]); // k + 1
        let b = p(&vars, &[(1, &[1, 1]), (-2, &[0, 0])]); // kn - 2
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.exact_div(&a).unwrap(), b);
        assert_eq!(prod.exact_div(&b).unwrap(), a);
        let c = p(&vars, &[(1, &[1, 0]), (2, &[0, 0])]);
        assert!(prod.exact_div(&c).is_none());
    }

    #[test]
    fn integer_primitive_normalizes_sign_and_content() {
        let vars = kn();
        // -4k/6 - 2/6 -> content -(1/3), primitive 2k + 1
        let a = Polynomial::from_terms(
            &vars,
            vec![(vec![1, 0], rat(-4, 6)), (vec![0, 0], rat(-2, 6))],
        )
        .unwrap();
        let (c, prim) = a.integer_primitive();
        assert_eq!(c, rat(-1, 3));
        assert_eq!(prim, p(&vars, &[(2, &[1, 0]), (1, &[0, 0])]));
    }

    #[test]
    fn eval_matches_arithmetic() {
        let vars = kn();
        let a = p(&vars, &[(1, &[2, 0]), (-1, &[0, 1])]); // k^2 - n
        let mut asn = BTreeMap::new();
        asn.insert("k".to_string(), rat_int(3));
        asn.insert("n".to_string(), rat_int(4));
        assert_eq!(a.eval(&asn).unwrap(), rat_int(5));
    }
}
