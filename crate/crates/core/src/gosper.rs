//! Gosper's decision procedure for indefinite hypergeometric summation:
//! given the shift ratio f(k+1)/f(k), either produce the rational
//! certificate R(k) = g(k)/f(k) of a hypergeometric antidifference g
//! (g(k+1) - g(k) = f(k)) or decide that none exists.
//!
//! The decomposition writes the ratio as
//!     ratio = (p(k+1)/p(k)) * (q(k)/s(k+1))
//! and solves the key equation q(k)*x(k+1) - s(k)*x(k) = p(k) for a
//! polynomial x of bounded degree; then R(k) = s(k)*x(k)/p(k). Parameters
//! (including the recurrence variable of an outer problem) live in the
//! coefficient field and flow through the linear solve exactly.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::symcore::{
    poly_gcd, primitive_in, resultant_in, solve_linear, Polynomial, Rat, RationalFunction, Vars,
};

/// Hard cap on the key-equation degree; hitting it is reported as an error
/// rather than treated as absence.
pub const DEGREE_CAP: u32 = 64;

/// Gosper-Petkovsek-style decomposition of a shift ratio:
/// ratio = (p(k+1)/p(k)) * (q(k)/s(k+1)), with q(k) and s(k+j) coprime in
/// the summation variable for every integer shift j >= 1.
#[derive(Clone, Debug)]
pub struct GPForm {
    pub p: Polynomial,
    pub q: Polynomial,
    pub s: Polynomial,
    pub var: String,
}

impl GPForm {
    /// Reconstruct the ratio this form represents.
    pub fn ratio(&self) -> Result<RationalFunction> {
        let num = self.p.shift(&self.var, 1)?.mul(&self.q)?;
        let den = self.p.mul(&self.s.shift(&self.var, 1)?)?;
        RationalFunction::new(num, den)
    }
}

/// Positive integer values of j for which q(k) and s(k+j) share a factor
/// of positive degree in `var`, found through the resultant in j and
/// verified by an actual gcd.
fn shift_match_set(q: &Polynomial, s: &Polynomial, var: &str) -> Result<Vec<i64>> {
    let vars = q.vars().clone();
    let mut names: Vec<String> = vars.names().to_vec();
    let jname = fresh_name(&names, "j");
    names.push(jname.clone());
    let jvars = Vars::new(names);
    let q_j = extend(q, &jvars)?;
    let s_j = {
        let s = extend(s, &jvars)?;
        let repl = Polynomial::var(&jvars, var)?.add(&Polynomial::var(&jvars, &jname)?)?;
        s.substitute(var, &repl)?
    };
    let var_idx = jvars.require(var)?;
    let res = resultant_in(&q_j, &s_j, var_idx)?;
    let mut candidates: Vec<i64> = Vec::new();
    if res.is_zero() {
        // degenerate: probe small shifts directly
        candidates.extend(1..=DEGREE_CAP as i64);
    } else {
        // A genuine common factor at shift j forces the resultant to vanish
        // identically in the parameters at that j, so every parameter-slice
        // of the resultant (as a univariate polynomial in j) carries the
        // candidate roots. Take one nonzero slice and verify each root.
        let j_idx = jvars.require(&jname)?;
        if res.degree_in(j_idx) == 0 {
            return Ok(vec![]);
        }
        let mut groups: std::collections::BTreeMap<Vec<u32>, Vec<(u32, Rat)>> =
            std::collections::BTreeMap::new();
        for (m, c) in res.terms() {
            let mut key = m.0.clone();
            let je = key[j_idx];
            key[j_idx] = 0;
            groups.entry(key).or_default().push((je, c.clone()));
        }
        let mut probe: Option<Polynomial> = None;
        for (_, coeffs) in groups {
            let p = univariate_from(&jvars, &jname, &coeffs)?;
            if !p.is_zero() {
                probe = Some(p);
                break;
            }
        }
        if let Some(p) = probe {
            for r in integer_roots_univariate(&p, &jname)? {
                if r.is_positive() {
                    if let Some(v) = r.to_i64() {
                        candidates.push(v);
                    }
                }
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let mut verified = Vec::new();
    for j in candidates {
        let s_shift = s.shift(var, j)?;
        let g = poly_gcd(q, &s_shift)?;
        if g.depends_on(q.vars().require(var)?) {
            verified.push(j);
        }
    }
    Ok(verified)
}

fn fresh_name(names: &[String], base: &str) -> String {
    let mut cand = base.to_string();
    let mut i = 0;
    while names.iter().any(|n| n == &cand) {
        i += 1;
        cand = format!("{}{}", base, i);
    }
    cand
}

fn extend(p: &Polynomial, target: &Vars) -> Result<Polynomial> {
    let mut out = Polynomial::zero(target);
    for (m, c) in p.terms() {
        let mut exps = vec![0u32; target.len()];
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                let name = &p.vars().names()[i];
                let j = target.require(name)?;
                exps[j] = e;
            }
        }
        out = out.add(&Polynomial::from_terms(target, vec![(exps, c.clone())])?)?;
    }
    Ok(out)
}

fn univariate_from(vars: &Vars, name: &str, coeffs: &[(u32, Rat)]) -> Result<Polynomial> {
    let idx = vars.require(name)?;
    let mut terms = Vec::new();
    for (e, c) in coeffs {
        let mut exps = vec![0u32; vars.len()];
        exps[idx] = *e;
        terms.push((exps, c.clone()));
    }
    Polynomial::from_terms(vars, terms)
}

fn integer_roots_univariate(p: &Polynomial, var: &str) -> Result<Vec<BigInt>> {
    use crate::symcore::{poly_integer_roots, RootDesc};
    let mut out = Vec::new();
    for r in poly_integer_roots(p, var, None)? {
        if let RootDesc::Integer(v) = r {
            out.push(v);
        }
    }
    Ok(out)
}

/// Decompose a nonzero canonical ratio into GP form by shift-gcd removal.
pub fn gp_decompose(ratio: &RationalFunction, var: &str) -> Result<GPForm> {
    if ratio.is_zero() {
        return Err(Error::Invalid("cannot decompose the zero ratio".into()));
    }
    let vars = ratio.vars().clone();
    let var_idx = vars.require(var)?;
    let mut p = Polynomial::one(&vars);
    let mut a = ratio.num().clone(); // becomes q
    let mut b = ratio.den().shift(var, -1)?; // becomes s
    loop {
        let matches = shift_match_set(&a, &b, var)?;
        let Some(&j) = matches.first() else { break };
        let s_j = b.shift(var, j)?;
        let g = poly_gcd(&a, &s_j)?;
        let g = primitive_in(&g, var_idx)?;
        if !g.depends_on(var_idx) {
            break;
        }
        a = a.exact_div(&g).expect("gcd divides q");
        let g_back = g.shift(var, -j)?;
        b = b.exact_div(&g_back).expect("shifted gcd divides s");
        // p gains prod_{i=1}^{j-1} g(k-i)
        for i in 1..j {
            p = p.mul(&g.shift(var, -i)?)?;
        }
    }
    Ok(GPForm {
        p,
        q: a,
        s: b,
        var: var.to_string(),
    })
}

/// Degree bound for the Gosper key equation q(k)x(k+1) - s(k)x(k) = rhs,
/// where `rhs_deg` is the k-degree of the right-hand side. None means no
/// polynomial solution can exist.
pub fn degree_bound(gp: &GPForm, rhs_deg: u32) -> Result<Option<u32>> {
    let vars = gp.p.vars().clone();
    let var_idx = vars.require(&gp.var)?;
    let dq = gp.q.degree_in(var_idx);
    let ds = gp.s.degree_in(var_idx);
    let lq = gp.q.coeff_in(var_idx, dq);
    let ls = gp.s.coeff_in(var_idx, ds);
    let bound: i64;
    if dq != ds || lq != ls {
        bound = rhs_deg as i64 - dq.max(ds) as i64;
    } else {
        // leading terms cancel; candidates per the classical case analysis
        let d1 = rhs_deg as i64 - dq as i64 + 1;
        let sub_q = if dq == 0 {
            Polynomial::zero(&vars)
        } else {
            gp.q.coeff_in(var_idx, dq - 1)
        };
        let sub_s = if ds == 0 {
            Polynomial::zero(&vars)
        } else {
            gp.s.coeff_in(var_idx, ds - 1)
        };
        let diff = sub_s.sub(&sub_q)?;
        let d2 = RationalFunction::new(diff, lq)?
            .as_integer()
            .and_then(|v| v.to_i64());
        bound = match d2 {
            Some(d2) => d1.max(d2),
            None => d1,
        };
    }
    if bound < 0 {
        return Ok(None);
    }
    if bound > DEGREE_CAP as i64 {
        return Err(Error::BoundOverflow(DEGREE_CAP));
    }
    Ok(Some(bound as u32))
}

/// Build the linear system for q(k)x(k+1) - s(k)x(k) = rhs with unknown
/// polynomial x of degree <= d; row per power of the summation variable,
/// entries rational functions over the remaining (parameter) variables.
fn key_equation_rows(
    gp: &GPForm,
    rhs: &Polynomial,
    d: u32,
) -> Result<(Vec<Vec<RationalFunction>>, Vec<RationalFunction>)> {
    let vars = gp.p.vars().clone();
    let var_idx = vars.require(&gp.var)?;
    let x = Polynomial::var(&vars, &gp.var)?;
    let mut k_pows = vec![Polynomial::one(&vars)];
    let mut k1_pows = vec![Polynomial::one(&vars)];
    let x1 = x.add(&Polynomial::one(&vars))?;
    for i in 1..=d {
        k_pows.push(k_pows[(i - 1) as usize].mul(&x)?);
        k1_pows.push(k1_pows[(i - 1) as usize].mul(&x1)?);
    }
    // column for unknown x_i: q*(k+1)^i - s*k^i
    let mut cols: Vec<Polynomial> = Vec::new();
    let mut max_deg = rhs.degree_in(var_idx);
    for i in 0..=d {
        let c = gp
            .q
            .mul(&k1_pows[i as usize])?
            .sub(&gp.s.mul(&k_pows[i as usize])?)?;
        max_deg = max_deg.max(c.degree_in(var_idx));
        cols.push(c);
    }
    let mut rows = Vec::new();
    let mut rhs_vec = Vec::new();
    for pow in 0..=max_deg {
        let row: Vec<RationalFunction> = cols
            .iter()
            .map(|c| RationalFunction::from_poly(c.coeff_in(var_idx, pow)))
            .collect();
        rows.push(row);
        rhs_vec.push(RationalFunction::from_poly(rhs.coeff_in(var_idx, pow)));
    }
    Ok((rows, rhs_vec))
}

/// Solve the key equation for x of degree <= d. Returns the coefficients
/// x_0..x_d (free variables pinned to zero for determinism).
pub fn solve_key_equation(
    gp: &GPForm,
    rhs: &Polynomial,
    d: u32,
) -> Result<Option<Vec<RationalFunction>>> {
    let (rows, rhs_vec) = key_equation_rows(gp, rhs, d)?;
    solve_linear(&rows, &rhs_vec)
}

/// Assemble x(k) from solved coefficients as a rational function.
pub fn assemble_poly_rf(
    vars: &Vars,
    var: &str,
    coeffs: &[RationalFunction],
) -> Result<RationalFunction> {
    let k = RationalFunction::var(vars, var)?;
    let mut acc = RationalFunction::zero(vars);
    let mut kp = RationalFunction::one(vars);
    for c in coeffs {
        acc = acc.add(&c.mul(&kp)?)?;
        kp = kp.mul(&k)?;
    }
    Ok(acc)
}

/// The one-variable certificate soundness relation:
/// ratio * R(k+1) - R(k) - 1, which must be identically zero.
pub fn certificate_residual(
    ratio: &RationalFunction,
    cert: &RationalFunction,
    var: &str,
) -> Result<RationalFunction> {
    let shifted = cert.shift(var, 1)?;
    ratio
        .mul(&shifted)?
        .sub(cert)?
        .sub(&RationalFunction::one(ratio.vars()))
}

/// Gosper's algorithm. `ratio` is the shift ratio f(k+1)/f(k) of the
/// summand; returns R(k) with g = R*f and g(k+1) - g(k) = f(k), or None
/// when no hypergeometric antidifference exists.
pub fn gosper_solve(ratio: &RationalFunction, var: &str) -> Result<Option<RationalFunction>> {
    if ratio.is_zero() {
        return Err(Error::Invalid("shift ratio must be nonzero".into()));
    }
    let gp = gp_decompose(ratio, var)?;
    let var_idx = gp.p.vars().require(var)?;
    let bound = match degree_bound(&gp, gp.p.degree_in(var_idx))? {
        Some(b) => b,
        None => return Ok(None),
    };
    let coeffs = match solve_key_equation(&gp, &gp.p, bound)? {
        Some(c) => c,
        None => return Ok(None),
    };
    let x = assemble_poly_rf(gp.p.vars(), var, &coeffs)?;
    let r = RationalFunction::from_poly(gp.s.clone())
        .mul(&x)?
        .div(&RationalFunction::from_poly(gp.p.clone()))?;
    let residual = certificate_residual(ratio, &r, var)?;
    if !residual.is_zero() {
        return Err(Error::CertificateGate(residual.render()));
    }
    Ok(Some(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{rat_int, Vars};

    fn kv() -> Vars {
        Vars::new(vec!["k", "n", "m"])
    }

    fn p(vars: &Vars, s: &[(i64, &[u32])]) -> Polynomial {
        Polynomial::from_terms(
            vars,
            s.iter().map(|(c, e)| (e.to_vec(), rat_int(*c))).collect(),
        )
        .unwrap()
    }

    fn rf(vars: &Vars, num: &[(i64, &[u32])], den: &[(i64, &[u32])]) -> RationalFunction {
        RationalFunction::new(p(vars, num), p(vars, den)).unwrap()
    }

    fn check_gp_invariants(gp: &GPForm, ratio: &RationalFunction) {
        // form reproduces the ratio
        assert_eq!(&gp.ratio().unwrap(), ratio);
        // gcd(q(k), s(k+j)) constant in k for 1 <= j <= 12
        let var_idx = gp.p.vars().require(&gp.var).unwrap();
        for j in 1..=12 {
            let s_j = gp.s.shift(&gp.var, j).unwrap();
            let g = poly_gcd(&gp.q, &s_j).unwrap();
            assert!(
                !g.depends_on(var_idx),
                "q and s(k+{}) share factor {}",
                j,
                g.render()
            );
        }
    }

    #[test]
    fn decompose_factorial_ratio() {
        let vars = kv();
        // summand k!: ratio (k+1)/1 -> p = 1, q = k+1, s = 1
        let ratio = rf(&vars, &[(1, &[1, 0, 0]), (1, &[0, 0, 0])], &[(1, &[0, 0, 0])]);
        let gp = gp_decompose(&ratio, "k").unwrap();
        assert!(gp.p.is_one());
        assert_eq!(gp.q, p(&vars, &[(1, &[1, 0, 0]), (1, &[0, 0, 0])]));
        assert!(gp.s.is_one());
        check_gp_invariants(&gp, &ratio);
    }

    #[test]
    fn decompose_identity_ratio() {
        let vars = kv();
        let ratio = RationalFunction::one(&vars);
        let gp = gp_decompose(&ratio, "k").unwrap();
        assert!(gp.p.is_one());
        assert!(gp.q.is_one());
        assert!(gp.s.is_one());
        check_gp_invariants(&gp, &ratio);
    }

    #[test]
    fn decompose_with_shift_gcd_extraction() {
        let vars = kv();
        // ratio (k+1)^2/k for summand k*k!: the matched factor moves into p
        let ratio = rf(
            &vars,
            &[(1, &[2, 0, 0]), (2, &[1, 0, 0]), (1, &[0, 0, 0])],
            &[(1, &[1, 0, 0])],
        );
        let gp = gp_decompose(&ratio, "k").unwrap();
        check_gp_invariants(&gp, &ratio);
        assert_eq!(gp.p, p(&vars, &[(1, &[1, 0, 0])])); // p = k
        assert_eq!(gp.q, p(&vars, &[(1, &[1, 0, 0]), (1, &[0, 0, 0])])); // q = k+1
        assert!(gp.s.is_one());
    }

    #[test]
    fn kfact_times_k_certificate() {
        let vars = kv();
        // f(k) = k * k!: ratio (k+1)^2/k; certificate R = 1/k (g = k!)
        let ratio = rf(
            &vars,
            &[(1, &[2, 0, 0]), (2, &[1, 0, 0]), (1, &[0, 0, 0])],
            &[(1, &[1, 0, 0])],
        );
        let r = gosper_solve(&ratio, "k").unwrap().unwrap();
        let expect = rf(&vars, &[(1, &[0, 0, 0])], &[(1, &[1, 0, 0])]);
        assert_eq!(r, expect);
    }

    #[test]
    fn harmonic_summand_has_no_certificate() {
        let vars = kv();
        // f(k) = 1/k: ratio k/(k+1)
        let ratio = rf(&vars, &[(1, &[1, 0, 0])], &[(1, &[1, 0, 0]), (1, &[0, 0, 0])]);
        assert!(gosper_solve(&ratio, "k").unwrap().is_none());
    }

    #[test]
    fn constant_summand_certificate_is_k() {
        let vars = kv();
        let ratio = RationalFunction::one(&vars);
        let r = gosper_solve(&ratio, "k").unwrap().unwrap();
        assert_eq!(r, RationalFunction::var(&vars, "k").unwrap());
    }

    #[test]
    fn degree_bound_for_pure_polynomial_ratio() {
        let vars = kv();
        // q = s = 1 (summing a polynomial): bound = deg rhs + 1
        let gp = GPForm {
            p: p(&vars, &[(1, &[2, 0, 0])]), // k^2
            q: Polynomial::one(&vars),
            s: Polynomial::one(&vars),
            var: "k".into(),
        };
        assert_eq!(degree_bound(&gp, 2).unwrap(), Some(3));
        // and the solve finds x with the key equation satisfied exactly
        let sol = solve_key_equation(&gp, &gp.p, 3).unwrap().unwrap();
        let x = assemble_poly_rf(&vars, "k", &sol).unwrap();
        let shifted = x.shift("k", 1).unwrap();
        let lhs = shifted.sub(&x).unwrap();
        assert_eq!(lhs, RationalFunction::from_poly(gp.p.clone()));
    }
}
