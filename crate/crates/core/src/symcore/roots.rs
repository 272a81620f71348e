//! Integer-root extraction and linear-factor peeling.
//!
//! Certificate denominators in this pipeline are overwhelmingly products of
//! integer-linear factors. We recover those by candidate enumeration (trailing
//! and leading coefficient divisors, recursively for multivariate trailing
//! coefficients), verifying every candidate by exact division. Whatever
//! remains after peeling is reported as an unresolved factor rather than
//! silently dropped.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{rat_int, Polynomial, Rat};
use crate::error::{Error, Result};

/// Cap on divisor enumeration; factors with larger constants fall through to
/// the unresolved bucket, which downstream treats conservatively.
const DIVISOR_CAP: u64 = 1_000_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootDesc {
    /// var = value, an integer root.
    Integer(BigInt),
    /// var = expr/den with expr a polynomial in the other variables and den a
    /// positive integer; den > 1 encodes a discrete (e.g. parity) condition.
    Linear { expr: Polynomial, den: BigInt },
    /// A factor whose roots we do not resolve symbolically.
    Unresolved(Polynomial),
}

#[derive(Clone, Debug)]
pub struct Factorization {
    pub constant: Rat,
    /// Primitive integer-linear factors with multiplicity, positive leading
    /// coefficient under graded-lex.
    pub factors: Vec<(Polynomial, u32)>,
    /// Non-constant remainder with no extractable linear factor, if any.
    pub residual: Option<Polynomial>,
}

fn abs_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![];
    }
    if n > BigInt::from(DIVISOR_CAP) {
        // keep the small divisors we can enumerate cheaply
        let mut out = Vec::new();
        let mut d = BigInt::one();
        while &d * &d <= BigInt::from(DIVISOR_CAP) {
            if (&n % &d).is_zero() {
                out.push(d.clone());
            }
            d += 1;
        }
        return out;
    }
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            let q = &n / &d;
            if q != d {
                out.push(q);
            }
        }
        d += 1;
    }
    out.sort();
    out
}

fn integer_content(p: &Polynomial) -> BigInt {
    let (c, _) = p.integer_primitive();
    // p is expected to have integer coefficients here
    c.numer().abs()
}

fn is_linear(p: &Polynomial) -> bool {
    p.total_degree() == 1
}

/// Extract all integer-linear factors of `p`, verified by exact division.
pub fn linear_factors(p: &Polynomial) -> Result<Factorization> {
    if p.is_zero() {
        return Ok(Factorization {
            constant: Rat::zero(),
            factors: vec![],
            residual: None,
        });
    }
    let (content, mut prim) = p.integer_primitive();
    let mut found: Vec<Polynomial> = Vec::new();
    let nvars = p.vars().len();
    for var_idx in 0..nvars {
        loop {
            if !prim.depends_on(var_idx) {
                break;
            }
            let mut progressed = false;
            for cand in candidate_linear(&prim, var_idx)? {
                if let Some(q) = prim.exact_div(&cand) {
                    found.push(cand);
                    prim = q.integer_primitive().1;
                    progressed = true;
                    break;
                }
            }
            if !progressed {
                break;
            }
        }
    }
    let residual = if prim.as_constant().is_some() {
        None
    } else {
        Some(prim)
    };
    let mut factors: Vec<(Polynomial, u32)> = Vec::new();
    for f in found {
        match factors.iter_mut().find(|(g, _)| *g == f) {
            Some((_, mult)) => *mult += 1,
            None => factors.push((f, 1)),
        }
    }
    factors.sort_by(|a, b| a.0.render().cmp(&b.0.render()));
    Ok(Factorization {
        constant: content,
        factors,
        residual,
    })
}

/// Candidate primitive linear factors a*x + B with a | content(lc_x) and
/// B | trailing coefficient (constants from divisor enumeration, linear parts
/// from recursive factorization of the trailing coefficient).
fn candidate_linear(prim: &Polynomial, var_idx: usize) -> Result<Vec<Polynomial>> {
    let vars = prim.vars().clone();
    let d = prim.degree_in(var_idx);
    if d == 0 {
        return Ok(vec![]);
    }
    let x = Polynomial::var(&vars, &vars.names()[var_idx])?;
    let mut out: Vec<Polynomial> = Vec::new();
    let trailing = prim.coeff_in(var_idx, 0);
    if trailing.is_zero() {
        out.push(x);
        return Ok(out);
    }
    let lc = prim.leading_coeff_in(var_idx);
    let a_cands = abs_divisors(&integer_content(&lc));
    let mut b_cands: Vec<Polynomial> = Vec::new();
    for b in abs_divisors(&integer_content(&trailing)) {
        b_cands.push(Polynomial::constant(&vars, Rat::from_integer(b)));
    }
    if trailing.total_degree() >= 1 {
        // Linear parts of the trailing coefficient (one variable fewer in
        // play, so the recursion terminates).
        let tf = linear_factors(&trailing)?;
        for (f, _) in tf.factors {
            if is_linear(&f) {
                b_cands.push(f);
            }
        }
    }
    for a in &a_cands {
        let ax = x.scale(&Rat::from_integer(a.clone()));
        for b in &b_cands {
            for sign in [1i64, -1] {
                let cand = ax.add(&b.scale(&rat_int(sign)))?;
                let (_, cand) = cand.integer_primitive();
                if is_linear(&cand) && !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
    }
    Ok(out)
}

/// Integer roots of a univariate integer-coefficient polynomial.
fn univariate_integer_roots(p: &Polynomial, var_idx: usize) -> Vec<BigInt> {
    let mut roots = Vec::new();
    let mut q = p.integer_primitive().1;
    // strip x^m
    let x = Polynomial::var(p.vars(), &p.vars().names()[var_idx]).expect("var exists");
    while q.coeff_in(var_idx, 0).is_zero() && q.depends_on(var_idx) {
        if !roots.contains(&BigInt::zero()) {
            roots.push(BigInt::zero());
        }
        q = q.exact_div(&x).expect("x divides");
    }
    let trailing = q.coeff_in(var_idx, 0);
    let tc = integer_content(&trailing);
    if tc.is_zero() {
        return roots;
    }
    let name = &p.vars().names()[var_idx];
    if !q.present_vars().iter().all(|&v| v == var_idx) {
        return roots;
    }
    for d in abs_divisors(&tc) {
        for sign in [1, -1] {
            let cand = if sign == 1 { d.clone() } else { -d.clone() };
            let mut asn: BTreeMap<String, Rat> = BTreeMap::new();
            for v in p.vars().names() {
                asn.insert(v.clone(), Rat::zero());
            }
            asn.insert(name.clone(), Rat::from_integer(cand.clone()));
            if q.eval(&asn).expect("full assignment").is_zero() && !roots.contains(&cand) {
                roots.push(cand);
            }
        }
    }
    roots.sort();
    roots
}

/// Roots of `p` in `var`: integer roots where decidable, symbolic linear root
/// descriptions for parametric linear factors, unresolved descriptions
/// otherwise. With `params` given, parameters are substituted first.
pub fn poly_integer_roots(
    p: &Polynomial,
    var: &str,
    params: Option<&BTreeMap<String, Rat>>,
) -> Result<Vec<RootDesc>> {
    if p.is_zero() {
        return Err(Error::Invalid("roots of the zero polynomial".into()));
    }
    let var_idx = p.vars().require(var)?;
    let mut work = p.clone();
    if let Some(asn) = params {
        for (name, value) in asn {
            if name == var {
                continue;
            }
            if work.vars().index_of(name).is_some() {
                let repl = Polynomial::constant(work.vars(), value.clone());
                work = work.substitute(name, &repl)?;
            }
        }
    }
    if work.is_zero() {
        return Err(Error::Invalid(
            "polynomial vanishes identically under the given parameters".into(),
        ));
    }
    if !work.depends_on(var_idx) {
        return Ok(vec![]);
    }
    let mut out: Vec<RootDesc> = Vec::new();
    let fac = linear_factors(&work)?;
    for (f, _) in &fac.factors {
        if !f.depends_on(var_idx) {
            continue;
        }
        // f = a*var + rest, a integer > 0 possible negative: primitive with
        // positive grlex lead; recover a and the var-free rest.
        let a = f.coeff_in(var_idx, 1);
        let a = a
            .as_constant()
            .ok_or_else(|| Error::NonLinear(f.render()))?;
        let rest = f.coeff_in(var_idx, 0);
        let a_int = a.numer().clone(); // primitive ⇒ integer coeffs
        if let Some(c) = rest.as_constant() {
            // numeric root -c/a
            let root_num = -c.numer().clone();
            if (root_num.clone() % a_int.clone()).is_zero() && c.denom().is_one() {
                let r = root_num / a_int;
                if !out.contains(&RootDesc::Integer(r.clone())) {
                    out.push(RootDesc::Integer(r));
                }
            }
            // non-integer rational root: no integer root from this factor
        } else {
            // var = -rest/a
            let expr = rest.neg();
            let (expr, den) = if a_int.is_negative() {
                (expr.neg(), -a_int)
            } else {
                (expr, a_int)
            };
            out.push(RootDesc::Linear { expr, den });
        }
    }
    if let Some(res) = &fac.residual {
        if res.depends_on(var_idx) {
            let only_var = res.present_vars().iter().all(|&v| v == var_idx);
            if only_var {
                for r in univariate_integer_roots(res, var_idx) {
                    if !out.contains(&RootDesc::Integer(r.clone())) {
                        out.push(RootDesc::Integer(r));
                    }
                }
            } else {
                out.push(RootDesc::Unresolved(res.clone()));
            }
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn to_i64(b: &BigInt) -> Option<i64> {
    b.to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::poly::Vars;

    fn knm() -> Vars {
        Vars::new(vec!["k", "n", "m"])
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
    fn factored_univariate_input() {
        let vars = knm();
        // k(k-3): roots {0, 3}
        let q = p(&vars, &[(1, &[2, 0, 0]), (-3, &[1, 0, 0])]);
        let roots = poly_integer_roots(&q, "k", None).unwrap();
        assert!(roots.contains(&RootDesc::Integer(BigInt::zero())));
        assert!(roots.contains(&RootDesc::Integer(BigInt::from(3))));
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn linear_parametric_factor() {
        let vars = knm();
        // n - k + 1: k = n + 1
        let q = p(&vars, &[(1, &[0, 1, 0]), (-1, &[1, 0, 0]), (1, &[0, 0, 0])]);
        let roots = poly_integer_roots(&q, "k", None).unwrap();
        assert_eq!(roots.len(), 1);
        match &roots[0] {
            RootDesc::Linear { expr, den } => {
                assert_eq!(expr, &p(&vars, &[(1, &[0, 1, 0]), (1, &[0, 0, 0])]));
                assert!(den.is_one());
            }
            other => panic!("expected linear root, got {:?}", other),
        }
    }

    #[test]
    fn odd_factor_has_no_integer_roots() {
        let vars = knm();
        // 2n + 1 over the integers: no roots in n
        let q = p(&vars, &[(2, &[0, 1, 0]), (1, &[0, 0, 0])]);
        let roots = poly_integer_roots(&q, "n", None).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn parity_sensitive_root() {
        let vars = knm();
        // n - 2k: k = n/2
        let q = p(&vars, &[(1, &[0, 1, 0]), (-2, &[1, 0, 0])]);
        let roots = poly_integer_roots(&q, "k", None).unwrap();
        assert_eq!(roots.len(), 1);
        match &roots[0] {
            RootDesc::Linear { expr, den } => {
                assert_eq!(expr, &p(&vars, &[(1, &[0, 1, 0])]));
                assert_eq!(den, &BigInt::from(2));
            }
            other => panic!("expected linear root, got {:?}", other),
        }
    }

    #[test]
    fn peels_expanded_certificate_denominator() {
        let vars = knm();
        // 2 (n-k+1)^2 (2n+1), expanded
        let nk1 = p(&vars, &[(1, &[0, 1, 0]), (-1, &[1, 0, 0]), (1, &[0, 0, 0])]);
        let tn1 = p(&vars, &[(2, &[0, 1, 0]), (1, &[0, 0, 0])]);
        let two = Polynomial::constant(&vars, rat_int(2));
        let den = two
            .mul(&nk1)
            .unwrap()
            .mul(&nk1)
            .unwrap()
            .mul(&tn1)
            .unwrap();
        let f = linear_factors(&den).unwrap();
        assert!(f.residual.is_none());
        assert_eq!(f.constant, rat_int(2));
        let mut mults: Vec<(String, u32)> = f
            .factors
            .iter()
            .map(|(p, m)| (p.render(), *m))
            .collect();
        mults.sort();
        assert_eq!(
            mults,
            vec![("2*n + 1".to_string(), 1), ("k - n - 1".to_string(), 2)]
        );
    }

    #[test]
    fn quadratic_residual_reported_unresolved() {
        let vars = knm();
        // k^2 + n^2 + 1 has no integer-linear factors
        let q = p(
            &vars,
            &[(1, &[2, 0, 0]), (1, &[0, 2, 0]), (1, &[0, 0, 0])],
        );
        let roots = poly_integer_roots(&q, "k", None).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(matches!(roots[0], RootDesc::Unresolved(_)));
    }
}
