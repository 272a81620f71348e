//! Rational functions in canonical form: gcd removed, numerator and
//! denominator scaled to coprime integer contents, denominator leading
//! coefficient positive under graded-lex. Equality is structural.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gcd::{poly_gcd, poly_lcm};
use super::poly::{render_rat, Polynomial, Rat, Vars};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    /// Canonicalize num/den. Errors on a zero denominator.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RationalFunction {
                num: Polynomial::zero(num.vars()),
                den: Polynomial::one(den.vars()),
            });
        }
        let g = poly_gcd(&num, &den)?;
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides"),
                den.exact_div(&g).expect("gcd divides"),
            )
        };
        // Scale so both sides have integer coefficients with the overall
        // rational content reduced and the denominator lead positive.
        let (cn, pn) = num.integer_primitive();
        let (cd, pd) = den.integer_primitive();
        let ratio = cn / cd; // cd > 0 by primitive normalization of a nonzero poly? sign folded below
        let rn = ratio.numer().clone();
        let rd = ratio.denom().clone();
        let num = pn.scale(&Rat::from_integer(rn));
        let den = pd.scale(&Rat::from_integer(rd));
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: Polynomial) -> Self {
        let one = Polynomial::one(p.vars());
        RationalFunction { num: p, den: one }
    }

    pub fn constant(vars: &Vars, c: Rat) -> Self {
        Self::from_poly(Polynomial::constant(vars, c))
    }

    pub fn zero(vars: &Vars) -> Self {
        Self::constant(vars, Rat::zero())
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rat::one())
    }

    pub fn var(vars: &Vars, name: &str) -> Result<Self> {
        Ok(Self::from_poly(Polynomial::var(vars, name)?))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn vars(&self) -> &Vars {
        self.num.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn as_constant(&self) -> Option<Rat> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// Some(i) when the value is a constant integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        let c = self.as_constant()?;
        if c.denom().is_one() {
            Some(c.numer().clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let num = self
            .num
            .mul(&other.den)?
            .add(&other.num.mul(&self.den)?)?;
        Self::new(num, self.den.mul(&other.den)?)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::new(self.num.mul(&other.num)?, self.den.mul(&other.den)?)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(self.num.mul(&other.den)?, self.den.mul(&other.num)?)
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn pow_i(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut out = Self::one(self.vars());
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Result<Self> {
        Self::new(self.num.scale(c), self.den.clone())
    }

    /// Substitute `var := var + offset` in numerator and denominator.
    pub fn shift(&self, var: &str, offset: i64) -> Result<Self> {
        Self::new(self.num.shift(var, offset)?, self.den.shift(var, offset)?)
    }

    pub fn substitute(&self, var: &str, replacement: &Polynomial) -> Result<Self> {
        Self::new(
            self.num.substitute(var, replacement)?,
            self.den.substitute(var, replacement)?,
        )
    }

    /// Exact evaluation; a vanishing denominator is reported as a pole.
    pub fn eval(&self, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
        let d = self.den.eval(assignment)?;
        if d.is_zero() {
            let point: Vec<String> = assignment
                .iter()
                .map(|(k, v)| format!("{}={}", k, render_rat(v)))
                .collect();
            return Err(Error::Pole(point.join(", ")));
        }
        Ok(self.num.eval(assignment)? / d)
    }

    /// Canonical text form, deterministic across runs.
    pub fn render(&self) -> String {
        if self.den.is_one() {
            if self.num.num_terms() <= 1 {
                self.num.render()
            } else {
                format!("({})", self.num.render())
            }
        } else {
            format!("({})/({})", self.num.render(), self.den.render())
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// lcm of denominators, used when clearing a family of rational functions.
pub fn common_denominator(rfs: &[RationalFunction]) -> Result<Polynomial> {
    let vars = rfs
        .first()
        .map(|r| r.vars().clone())
        .expect("nonempty family");
    let mut acc = Polynomial::one(&vars);
    for r in rfs {
        acc = poly_lcm(&acc, r.den())?;
    }
    Ok(acc)
}

#[allow(dead_code)]
fn is_unit(r: &BigRational) -> bool {
    r.numer().abs() == BigInt::one() && r.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::poly::{rat, rat_int};

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
    fn content_removal() {
        let vars = kn();
        // (2k)/(2) -> k/1
        let r = RationalFunction::new(
            p(&vars, &[(2, &[1, 0])]),
            Polynomial::constant(&vars, rat_int(2)),
        )
        .unwrap();
        assert_eq!(r.num(), &p(&vars, &[(1, &[1, 0])]));
        assert!(r.den().is_one());
    }

    #[test]
    fn gcd_removal_by_exact_division() {
        let vars = kn();
        // (k^2 - 1)/(k - 1) -> (k + 1)/1
        let num = p(&vars, &[(1, &[2, 0]), (-1, &[0, 0])]);
        let den = p(&vars, &[(1, &[1, 0]), (-1, &[0, 0])]);
        let r = RationalFunction::new(num, den).unwrap();
        assert_eq!(r.num(), &p(&vars, &[(1, &[1, 0]), (1, &[0, 0])]));
        assert!(r.den().is_one());
    }

    #[test]
    fn sign_normalization() {
        let vars = kn();
        // (-k)/(-(n+1)) -> k/(n+1)
        let r = RationalFunction::new(
            p(&vars, &[(-1, &[1, 0])]),
            p(&vars, &[(-1, &[0, 1]), (-1, &[0, 0])]),
        )
        .unwrap();
        assert_eq!(r.num(), &p(&vars, &[(1, &[1, 0])]));
        assert_eq!(r.den(), &p(&vars, &[(1, &[0, 1]), (1, &[0, 0])]));
    }

    #[test]
    fn additive_inverse_and_partial_fractions() {
        let vars = kn();
        let kp1 = RationalFunction::new(
            Polynomial::one(&vars),
            p(&vars, &[(1, &[1, 0]), (1, &[0, 0])]),
        )
        .unwrap();
        let kp2 = RationalFunction::new(
            Polynomial::one(&vars),
            p(&vars, &[(1, &[1, 0]), (2, &[0, 0])]),
        )
        .unwrap();
        assert!(kp1.sub(&kp1).unwrap().is_zero());
        assert!(kp1.mul(&kp1.recip().unwrap()).unwrap().is_one());
        // 1/(k+1) + 1/(k+2) = (2k+3)/((k+1)(k+2))
        let s = kp1.add(&kp2).unwrap();
        let expect = RationalFunction::new(
            p(&vars, &[(2, &[1, 0]), (3, &[0, 0])]),
            p(&vars, &[(1, &[2, 0]), (3, &[1, 0]), (2, &[0, 0])]),
        )
        .unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn pole_detection_on_eval() {
        let vars = kn();
        let r = RationalFunction::new(
            p(&vars, &[(1, &[1, 0])]),
            p(&vars, &[(1, &[0, 1]), (1, &[0, 0])]),
        )
        .unwrap();
        let mut asn = BTreeMap::new();
        asn.insert("k".into(), rat_int(3));
        asn.insert("n".into(), rat_int(1));
        assert_eq!(r.eval(&asn).unwrap(), rat(3, 2));
        asn.insert("n".into(), rat_int(-1));
        assert!(matches!(r.eval(&asn), Err(Error::Pole(_))));
    }

    #[test]
    fn zero_denominator_rejected() {
        let vars = kn();
        assert!(matches!(
            RationalFunction::new(Polynomial::one(&vars), Polynomial::zero(&vars)),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn rational_content_splits_between_sides() {
        let vars = kn();
        // (1/2) / n stays 1/(2n): integer contents, coprime
        let r = RationalFunction::new(
            Polynomial::constant(&vars, rat(1, 2)),
            p(&vars, &[(1, &[0, 1])]),
        )
        .unwrap();
        assert_eq!(r.num(), &Polynomial::one(&vars));
        assert_eq!(r.den(), &p(&vars, &[(2, &[0, 1])]));
    }
}
