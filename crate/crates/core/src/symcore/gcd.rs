//! Multivariate gcd by recursive contents and primitive subresultant
//! remainder sequences, plus resultants via fraction-free elimination.

use num_traits::{One, Zero};

use super::poly::{Mono, Polynomial, Rat, Vars};
use crate::error::Result;

/// Monic-normalized multivariate gcd. gcd(0, 0) = 0; otherwise the result
/// divides both inputs exactly and has graded-lex leading coefficient 1.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    let g = gcd_inner(a, b)?;
    Ok(g.monic())
}

fn gcd_inner(a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    if a.is_zero() {
        return Ok(b.clone());
    }
    if b.is_zero() {
        return Ok(a.clone());
    }
    let mut present = a.present_vars();
    for v in b.present_vars() {
        if !present.contains(&v) {
            present.push(v);
        }
    }
    if present.is_empty() {
        // Nonzero constants: units over the rationals.
        return Ok(Polynomial::one(a.vars()));
    }
    // Prefer a variable both depend on; the recursion still terminates on
    // the count of present variables otherwise.
    present.sort_unstable();
    let var = *present
        .iter()
        .find(|&&v| a.depends_on(v) && b.depends_on(v))
        .unwrap_or(&present[0]);
    if !a.depends_on(var) || !b.depends_on(var) {
        // One side is free of `var`: gcd divides the other's content in var.
        let (free, bound) = if a.depends_on(var) { (b, a) } else { (a, b) };
        let cont = content_in(bound, var)?;
        return gcd_inner(free, &cont);
    }

    let cont_a = content_in(a, var)?;
    let cont_b = content_in(b, var)?;
    let pp_a = a.exact_div(&cont_a).expect("content divides");
    let pp_b = b.exact_div(&cont_b).expect("content divides");
    let cont_g = gcd_inner(&cont_a, &cont_b)?;
    let prim_g = subresultant_prs_gcd(&pp_a, &pp_b, var)?;
    cont_g.mul(&prim_g)
}

/// Content of p with respect to one variable: the gcd of its coefficient
/// polynomials in the remaining variables.
pub fn content_in(p: &Polynomial, var_idx: usize) -> Result<Polynomial> {
    let d = p.degree_in(var_idx);
    let mut acc = Polynomial::zero(p.vars());
    for e in 0..=d {
        let c = p.coeff_in(var_idx, e);
        if !c.is_zero() {
            acc = gcd_inner(&acc, &c)?;
            if acc.as_constant().map(|c| !c.is_zero()).unwrap_or(false) {
                break;
            }
        }
    }
    Ok(acc.monic())
}

pub fn primitive_in(p: &Polynomial, var_idx: usize) -> Result<Polynomial> {
    let c = content_in(p, var_idx)?;
    Ok(p.exact_div(&c).expect("content divides"))
}

/// Primitive subresultant PRS gcd of two polynomials primitive in `var`.
fn subresultant_prs_gcd(a: &Polynomial, b: &Polynomial, var_idx: usize) -> Result<Polynomial> {
    let (mut f, mut g) = if a.degree_in(var_idx) >= b.degree_in(var_idx) {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    let vars = f.vars().clone();
    let mut beta_g = Polynomial::one(&vars);
    let mut beta_h = Polynomial::one(&vars);
    loop {
        let delta = f.degree_in(var_idx) - g.degree_in(var_idx);
        let (_, rem) = f.pseudo_div_rem(&g, var_idx)?;
        if rem.is_zero() {
            return primitive_in(&g, var_idx);
        }
        if rem.degree_in(var_idx) == 0 {
            // Common divisor is free of var; primitive inputs ⇒ gcd 1.
            return Ok(Polynomial::one(&vars));
        }
        let mut divisor = beta_g.clone();
        for _ in 0..delta {
            divisor = divisor.mul(&beta_h)?;
        }
        let next = rem
            .exact_div(&divisor)
            .expect("subresultant scaling divides exactly");
        beta_g = g.leading_coeff_in(var_idx);
        beta_h = if delta == 0 {
            beta_h
        } else {
            // h' = g^delta / h^(delta-1), exact in the coefficient ring.
            let mut numer = Polynomial::one(&vars);
            for _ in 0..delta {
                numer = numer.mul(&beta_g)?;
            }
            let mut denom = Polynomial::one(&vars);
            for _ in 0..delta.saturating_sub(1) {
                denom = denom.mul(&beta_h)?;
            }
            numer.exact_div(&denom).expect("h update divides exactly")
        };
        f = g;
        g = next;
    }
}

/// Resultant of a and b with respect to their `var`-degrees, computed as the
/// Sylvester determinant by fraction-free (Bareiss) elimination. Entries are
/// polynomials in the remaining variables.
pub fn resultant_in(a: &Polynomial, b: &Polynomial, var_idx: usize) -> Result<Polynomial> {
    let vars = a.vars().clone();
    let da = a.degree_in(var_idx) as usize;
    let db = b.degree_in(var_idx) as usize;
    if da == 0 && db == 0 {
        return Ok(Polynomial::one(&vars));
    }
    if a.is_zero() || b.is_zero() {
        return Ok(Polynomial::zero(&vars));
    }
    let n = da + db;
    let coeff = |p: &Polynomial, d: usize, i: usize| -> Polynomial {
        if i > d {
            Polynomial::zero(&vars)
        } else {
            p.coeff_in(var_idx, (d - i) as u32)
        }
    };
    let mut m: Vec<Vec<Polynomial>> = vec![vec![Polynomial::zero(&vars); n]; n];
    for row in 0..db {
        for i in 0..=da {
            m[row][row + i] = coeff(a, da, i);
        }
    }
    for row in 0..da {
        for i in 0..=db {
            m[db + row][row + i] = coeff(b, db, i);
        }
    }
    bareiss_determinant(m, &vars)
}

/// Fraction-free determinant of a polynomial matrix.
fn bareiss_determinant(mut m: Vec<Vec<Polynomial>>, vars: &Vars) -> Result<Polynomial> {
    let n = m.len();
    if n == 0 {
        return Ok(Polynomial::one(vars));
    }
    let mut sign_flip = false;
    let mut prev = Polynomial::one(vars);
    for i in 0..n.saturating_sub(1) {
        if m[i][i].is_zero() {
            let swap = (i + 1..n).find(|&r| !m[r][i].is_zero());
            match swap {
                Some(r) => {
                    m.swap(i, r);
                    sign_flip = !sign_flip;
                }
                None => return Ok(Polynomial::zero(vars)),
            }
        }
        for r in i + 1..n {
            for c in i + 1..n {
                let t = m[i][i].mul(&m[r][c])?.sub(&m[r][i].mul(&m[i][c])?)?;
                m[r][c] = t
                    .exact_div(&prev)
                    .expect("Bareiss pivot divides exactly");
            }
            m[r][i] = Polynomial::zero(vars);
        }
        prev = m[i][i].clone();
    }
    let mut det = m[n - 1][n - 1].clone();
    if sign_flip {
        det = det.neg();
    }
    Ok(det)
}

/// lcm normalized monic; lcm(x, 0) = 0.
pub fn poly_lcm(a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    if a.is_zero() || b.is_zero() {
        return Ok(Polynomial::zero(a.vars()));
    }
    let g = poly_gcd(a, b)?;
    let q = a.exact_div(&g).expect("gcd divides");
    Ok(q.mul(b)?.monic())
}

#[allow(dead_code)]
fn mono_of(vars: &Vars, exps: Vec<u32>) -> Mono {
    debug_assert_eq!(exps.len(), vars.len());
    Mono(exps)
}

#[allow(dead_code)]
fn one_rat() -> Rat {
    Rat::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::poly::rat_int;

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
    fn gcd_with_zero_is_monic_other() {
        let vars = kn();
        let a = p(&vars, &[(2, &[1, 0]), (2, &[0, 0])]); // 2k + 2
        let z = Polynomial::zero(&vars);
        let g = poly_gcd(&a, &z).unwrap();
        assert_eq!(g, p(&vars, &[(1, &[1, 0]), (1, &[0, 0])])); // k + 1
        assert!(poly_gcd(&z, &z).unwrap().is_zero());
    }

    #[test]
    fn gcd_of_univariate_factors() {
        let vars = kn();
        let kp1 = p(&vars, &[(1, &[1, 0]), (1, &[0, 0])]);
        let km1 = p(&vars, &[(1, &[1, 0]), (-1, &[0, 0])]);
        let k2m1 = kp1.mul(&km1).unwrap();
        let g = poly_gcd(&k2m1, &kp1).unwrap();
        assert_eq!(g, kp1);
        // both inputs divide exactly
        assert!(k2m1.exact_div(&g).is_some());
    }

    #[test]
    fn gcd_of_bivariate_products() {
        let vars = kn();
        // gcd((n-k+1)^2, (n-k+1)(2n+1)) = n-k+1 up to monic normalization
        let nk1 = p(&vars, &[(1, &[0, 1]), (-1, &[1, 0]), (1, &[0, 0])]);
        let tn1 = p(&vars, &[(2, &[0, 1]), (1, &[0, 0])]);
        let a = nk1.mul(&nk1).unwrap();
        let b = nk1.mul(&tn1).unwrap();
        let g = poly_gcd(&a, &b).unwrap();
        // monic in grlex: leading term of n-k+1 is -k, so monic form is k-n-1
        assert_eq!(g, nk1.monic());
        assert!(a.exact_div(&g).is_some());
        assert!(b.exact_div(&g).is_some());
    }

    #[test]
    fn resultant_detects_shift_matches() {
        // Res_k(k, k+1+j) as a polynomial in j vanishes at j = -1.
        let vars = Vars::new(vec!["k", "j"]);
        let a = p(&vars, &[(1, &[1, 0])]);
        let b = p(&vars, &[(1, &[1, 0]), (1, &[0, 1]), (1, &[0, 0])]);
        let r = resultant_in(&a, &b, 0).unwrap();
        // r = j + 1
        assert_eq!(r, p(&vars, &[(1, &[0, 1]), (1, &[0, 0])]));
    }

    #[test]
    fn lcm_product_relation() {
        let vars = kn();
        let a = p(&vars, &[(1, &[1, 0]), (1, &[0, 0])]);
        let b = p(&vars, &[(1, &[1, 0]), (-1, &[0, 0])]);
        let l = poly_lcm(&a, &b).unwrap();
        assert!(l.exact_div(&a).is_some());
        assert!(l.exact_div(&b).is_some());
        assert_eq!(l.total_degree(), 2);
    }
}
