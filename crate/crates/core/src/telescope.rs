//! WZ-pair and creative-telescoping synthesis.
//!
//! For a bi-hypergeometric term F(n,k), a WZ pair is (F, G) with
//!     F(n+1,k) - F(n,k) = G(n,k+1) - G(n,k),    G = R * F,
//! and R(n,k) rational: the certificate. Synthesis forms the difference
//! H = F*(rho_n - 1), runs Gosper on H's k-ratio, and translates the
//! one-variable certificate back. When no order-1 pair exists, a
//! higher-order relation sum_j a_j(n) F(n+j,k) = G(n,k+1) - G(n,k) is
//! searched by parameterized Gosper with the a_j as extra unknowns in the
//! key-equation linear system. Every certificate is verified symbolically
//! before it is returned; `residual_verified` is never set otherwise.

use crate::error::{Error, Result};
use crate::gosper::{assemble_poly_rf, degree_bound, gosper_solve, gp_decompose};
use crate::hyperterm::HyperTerm;
use crate::parser::{REC_VAR, SUM_VAR};
use crate::symcore::{common_denominator, null_space, Polynomial, RationalFunction};

/// A verified WZ pair: certificate R with companion G = R*F. The companion
/// is never materialized as a term; downstream work needs only (R, F).
#[derive(Clone, Debug)]
pub struct WZPair {
    pub term: HyperTerm,
    pub certificate: RationalFunction,
    pub residual_verified: bool,
}

/// An order-J creative-telescoping relation
/// sum_{j=0..J} coeffs[j](n) * F(n+j,k) = G(n,k+1) - G(n,k), G = R*F.
#[derive(Clone, Debug)]
pub struct TelescopeRelation {
    pub term: HyperTerm,
    pub order: u32,
    pub coeffs: Vec<RationalFunction>,
    pub certificate: RationalFunction,
}

/// Either a WZ pair (order 1, coefficients -1, +1) or a general relation.
#[derive(Clone, Debug)]
pub enum Relation {
    Wz(WZPair),
    Creative(TelescopeRelation),
}

impl Relation {
    pub fn certificate(&self) -> &RationalFunction {
        match self {
            Relation::Wz(p) => &p.certificate,
            Relation::Creative(r) => &r.certificate,
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Relation::Wz(_) => 1,
            Relation::Creative(r) => r.order,
        }
    }
}

/// The WZ residual rho_n - 1 - (sigma_k(R) * rho_k - R); zero iff
/// (F, R*F) is a WZ pair.
pub fn verify_wz_equation(f: &HyperTerm, r: &RationalFunction) -> Result<RationalFunction> {
    let rho_n = f.ratio_shift(REC_VAR)?;
    let rho_k = f.ratio_shift(SUM_VAR)?;
    let one = RationalFunction::one(r.vars());
    let shifted = r.shift(SUM_VAR, 1)?;
    rho_n.sub(&one)?.sub(&shifted.mul(&rho_k)?.sub(r)?)
}

/// Synthesize the order-1 certificate for F, or None when Gosper decides
/// no hypergeometric companion exists.
pub fn wz_certify(f: &HyperTerm) -> Result<Option<WZPair>> {
    let vars = f.vars().clone();
    let rho_n = f.ratio_shift(REC_VAR)?;
    let one = RationalFunction::one(&vars);
    let diff = rho_n.sub(&one)?;
    if diff.is_zero() {
        // F independent of n: G = 0 suffices
        return Ok(Some(WZPair {
            term: f.clone(),
            certificate: RationalFunction::zero(&vars),
            residual_verified: true,
        }));
    }
    // H = F*(rho_n - 1); H(k+1)/H(k) = rho_k * sigma_k(diff)/diff
    let rho_k = f.ratio_shift(SUM_VAR)?;
    let h_ratio = rho_k.mul(&diff.shift(SUM_VAR, 1)?)?.div(&diff)?;
    let r_h = match gosper_solve(&h_ratio, SUM_VAR)? {
        Some(r) => r,
        None => return Ok(None),
    };
    let certificate = r_h.mul(&diff)?;
    let residual = verify_wz_equation(f, &certificate)?;
    if !residual.is_zero() {
        return Err(Error::CertificateGate(residual.render()));
    }
    Ok(Some(WZPair {
        term: f.clone(),
        certificate,
        residual_verified: true,
    }))
}

/// Residual of a general relation: sum_j a_j * rho^(j) - (sigma_k(R)*rho_k - R)
/// where rho^(j) = F(n+j,k)/F(n,k).
pub fn verify_relation(
    f: &HyperTerm,
    coeffs: &[RationalFunction],
    r: &RationalFunction,
) -> Result<RationalFunction> {
    let vars = f.vars().clone();
    let rho_n = f.ratio_shift(REC_VAR)?;
    let rho_k = f.ratio_shift(SUM_VAR)?;
    let mut lhs = RationalFunction::zero(&vars);
    let mut cumulative = RationalFunction::one(&vars);
    for (j, a) in coeffs.iter().enumerate() {
        if j > 0 {
            cumulative = cumulative.mul(&rho_n.shift(REC_VAR, j as i64 - 1)?)?;
        }
        lhs = lhs.add(&a.mul(&cumulative)?)?;
    }
    let rhs = r.shift(SUM_VAR, 1)?.mul(&rho_k)?.sub(r)?;
    lhs.sub(&rhs)
}

/// Find the smallest-order telescoping relation with 1 <= J <= max_order.
/// Unknown coefficients a_j(n) enter the Gosper key equation as extra
/// columns of a homogeneous linear system.
pub fn creative_telescope(f: &HyperTerm, max_order: u32) -> Result<Option<TelescopeRelation>> {
    if max_order == 0 {
        return Err(Error::Invalid("max_order must be at least 1".into()));
    }
    let vars = f.vars().clone();
    let var_idx = vars.require(SUM_VAR)?;
    let rho_n = f.ratio_shift(REC_VAR)?;
    let rho_k = f.ratio_shift(SUM_VAR)?;
    for order in 1..=max_order {
        // rho^(j) = prod_{i<j} sigma_n^i(rho_n), j = 0..order
        let mut shifted_ratios: Vec<RationalFunction> = vec![RationalFunction::one(&vars)];
        for j in 1..=order {
            let prev = shifted_ratios[(j - 1) as usize].clone();
            shifted_ratios.push(prev.mul(&rho_n.shift(REC_VAR, j as i64 - 1)?)?);
        }
        let v = common_denominator(&shifted_ratios)?;
        // u_j = rho^(j) * v, a polynomial
        let mut u: Vec<Polynomial> = Vec::new();
        for r in &shifted_ratios {
            let cof = v
                .exact_div(r.den())
                .expect("lcm divisible by each denominator");
            u.push(r.num().mul(&cof)?);
        }
        // F~ = F/v has fully known ratio rho_k * v / sigma_k(v)
        let base_ratio = rho_k
            .mul(&RationalFunction::from_poly(v.clone()))?
            .div(&RationalFunction::from_poly(v.shift(SUM_VAR, 1)?))?;
        let gp = gp_decompose(&base_ratio, SUM_VAR)?;
        let du = u.iter().map(|p| p.degree_in(var_idx)).max().unwrap_or(0);
        let dp = gp.p.degree_in(var_idx);
        let bound = match degree_bound(&gp, dp + du)? {
            Some(b) => b,
            None => continue,
        };
        // homogeneous system in x_0..x_d, a_0..a_J:
        // q(k) x(k+1) - s(k) x(k) - p(k) * sum_j a_j u_j(k) = 0
        let x_cols = bound as usize + 1;
        let base_rows = key_rows(&gp, bound)?;
        let mut max_pow = base_rows.len();
        let pu: Vec<Polynomial> = u.iter().map(|uj| gp.p.mul(uj)).collect::<Result<_>>()?;
        for c in &pu {
            max_pow = max_pow.max(c.degree_in(var_idx) as usize + 1);
        }
        let mut rows: Vec<Vec<RationalFunction>> = Vec::new();
        for pow in 0..max_pow {
            let mut row: Vec<RationalFunction> = Vec::with_capacity(x_cols + pu.len());
            for c in 0..x_cols {
                let entry = base_rows
                    .get(pow)
                    .map(|r| r[c].clone())
                    .unwrap_or_else(|| RationalFunction::zero(&vars));
                row.push(entry);
            }
            for c in &pu {
                row.push(RationalFunction::from_poly(c.coeff_in(var_idx, pow as u32)).neg());
            }
            rows.push(row);
        }
        let basis = null_space(&rows)?;
        for vec_x in basis {
            let a_part = &vec_x[x_cols..];
            if a_part.iter().all(|a| a.is_zero()) {
                continue;
            }
            // normalize so the last nonzero coefficient is 1
            let last = a_part
                .iter()
                .rposition(|a| !a.is_zero())
                .expect("nonzero coefficient exists");
            let scale = a_part[last].clone();
            let coeffs: Vec<RationalFunction> = a_part
                .iter()
                .map(|a| a.div(&scale))
                .collect::<Result<_>>()?;
            let x_coeffs: Vec<RationalFunction> = vec_x[..x_cols]
                .iter()
                .map(|x| x.div(&scale))
                .collect::<Result<_>>()?;
            let x = assemble_poly_rf(&vars, SUM_VAR, &x_coeffs)?;
            // R = s*x / (p*v)
            let r = RationalFunction::from_poly(gp.s.clone())
                .mul(&x)?
                .div(&RationalFunction::from_poly(gp.p.mul(&v)?))?;
            let residual = verify_relation(f, &coeffs, &r)?;
            if residual.is_zero() {
                let effective = coeffs.iter().rposition(|a| !a.is_zero()).unwrap_or(0) as u32;
                return Ok(Some(TelescopeRelation {
                    term: f.clone(),
                    order: effective,
                    coeffs,
                    certificate: r,
                }));
            }
        }
    }
    Ok(None)
}

/// Coefficient rows of q(k)x(k+1) - s(k)x(k) for unknown x of degree <= d,
/// sliced by powers of the summation variable.
fn key_rows(gp: &crate::gosper::GPForm, d: u32) -> Result<Vec<Vec<RationalFunction>>> {
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
    let mut cols: Vec<Polynomial> = Vec::new();
    let mut max_deg = 0;
    for i in 0..=d {
        let c = gp
            .q
            .mul(&k1_pows[i as usize])?
            .sub(&gp.s.mul(&k_pows[i as usize])?)?;
        max_deg = max_deg.max(c.degree_in(var_idx));
        cols.push(c);
    }
    let mut rows = Vec::new();
    for pow in 0..=max_deg {
        let row: Vec<RationalFunction> = cols
            .iter()
            .map(|c| RationalFunction::from_poly(c.coeff_in(var_idx, pow)))
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Certify with WZ first, then fall back to creative telescoping.
pub fn certify(f: &HyperTerm, max_order: u32) -> Result<Option<Relation>> {
    if let Some(pair) = wz_certify(f)? {
        return Ok(Some(Relation::Wz(pair)));
    }
    if max_order >= 2 {
        if let Some(rel) = creative_telescope(f, max_order)? {
            return Ok(Some(Relation::Creative(rel)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperterm::{FactorKind, LinExpr, PowBase};
    use crate::symcore::{rat_int, Rat, Vars};
    use num_traits::One;
    use std::collections::BTreeMap;

    fn vars() -> Vars {
        Vars::new(vec!["k", "n", "m"])
    }

    fn binom(v: &Vars, t: LinExpr, b: LinExpr) -> HyperTerm {
        HyperTerm::from_factor(v, FactorKind::Binom(t, b), 1).unwrap()
    }

    fn p(v: &Vars, s: &[(i64, &[u32])]) -> Polynomial {
        Polynomial::from_terms(
            v,
            s.iter().map(|(c, e)| (e.to_vec(), rat_int(*c))).collect(),
        )
        .unwrap()
    }

    fn rf(v: &Vars, num: &[(i64, &[u32])], den: &[(i64, &[u32])]) -> RationalFunction {
        RationalFunction::new(p(v, num), p(v, den)).unwrap()
    }

    /// F(n,k) = binom(n,k)^2 / binom(2n,n), the normalized central summand.
    fn central_f(v: &Vars) -> HyperTerm {
        binom(v, LinExpr::var("n"), LinExpr::var("k"))
            .pow(2)
            .unwrap()
            .div(&binom(v, LinExpr::var("n").scale(2), LinExpr::var("n")))
            .unwrap()
    }

    /// F = A/B with A = (-1)^k binom(n,k) m/(m+k), B = 1/binom(m+n,n).
    fn alt_recip_f(v: &Vars) -> HyperTerm {
        let sign = HyperTerm::from_factor(
            v,
            FactorKind::Power(PowBase::Rational(-Rat::one()), LinExpr::var("k")),
            1,
        )
        .unwrap();
        let mpoly = Polynomial::var(v, "m").unwrap();
        let mk = mpoly.add(&Polynomial::var(v, "k").unwrap()).unwrap();
        let a = sign
            .mul(&binom(v, LinExpr::var("n"), LinExpr::var("k")))
            .unwrap()
            .mul(&HyperTerm::from_factor(v, FactorKind::Poly(mpoly), 1).unwrap())
            .unwrap()
            .mul(&HyperTerm::from_factor(v, FactorKind::Poly(mk), -1).unwrap())
            .unwrap();
        let b = HyperTerm::from_factor(
            v,
            FactorKind::Binom(LinExpr::var("m").add(&LinExpr::var("n")), LinExpr::var("n")),
            -1,
        )
        .unwrap();
        a.div(&b).unwrap()
    }

    #[test]
    fn central_certificate_matches_closed_form() {
        let v = vars();
        let f = central_f(&v);
        let pair = wz_certify(&f).unwrap().unwrap();
        // R = -k^2 (3n - 2k + 3) / (2 (n-k+1)^2 (2n+1))
        let k2 = p(&v, &[(1, &[2, 0, 0])]);
        let lin = p(&v, &[(3, &[0, 1, 0]), (-2, &[1, 0, 0]), (3, &[0, 0, 0])]);
        let num = k2.mul(&lin).unwrap().neg();
        let nk1 = p(&v, &[(1, &[0, 1, 0]), (-1, &[1, 0, 0]), (1, &[0, 0, 0])]);
        let tn1 = p(&v, &[(2, &[0, 1, 0]), (1, &[0, 0, 0])]);
        let den = nk1
            .mul(&nk1)
            .unwrap()
            .mul(&tn1)
            .unwrap()
            .scale(&rat_int(2));
        let expect = RationalFunction::new(num, den).unwrap();
        assert_eq!(pair.certificate, expect);
        assert!(pair.residual_verified);
    }

    #[test]
    fn alternating_reciprocal_certificate_matches_closed_form() {
        let v = vars();
        let f = alt_recip_f(&v);
        let pair = wz_certify(&f).unwrap().unwrap();
        // R = -(k+m) k / ((n-k+1)(n+1))
        let num = p(&v, &[(1, &[1, 0, 1]), (1, &[2, 0, 0])]).neg(); // -(km + k^2)
        let nk1 = p(&v, &[(1, &[0, 1, 0]), (-1, &[1, 0, 0]), (1, &[0, 0, 0])]);
        let n1 = p(&v, &[(1, &[0, 1, 0]), (1, &[0, 0, 0])]);
        let den = nk1.mul(&n1).unwrap();
        let expect = RationalFunction::new(num, den).unwrap();
        assert_eq!(pair.certificate, expect);
    }

    #[test]
    fn perturbed_certificate_fails_verification() {
        let v = vars();
        let f = central_f(&v);
        let pair = wz_certify(&f).unwrap().unwrap();
        let perturbed = pair.certificate.add(&RationalFunction::one(&v)).unwrap();
        let residual = verify_wz_equation(&f, &perturbed).unwrap();
        assert!(!residual.is_zero());
    }

    #[test]
    fn binomial_over_power_certifies() {
        let v = vars();
        // F = binom(n,k)/2^n
        let f = binom(&v, LinExpr::var("n"), LinExpr::var("k"))
            .div(
                &HyperTerm::from_factor(
                    &v,
                    FactorKind::Power(PowBase::Rational(rat_int(2)), LinExpr::var("n")),
                    1,
                )
                .unwrap(),
            )
            .unwrap();
        let pair = wz_certify(&f).unwrap().unwrap();
        assert!(verify_wz_equation(&f, &pair.certificate).unwrap().is_zero());
        // numeric spot-check of the WZ equation away from support edges
        let at = |nv: i64, kv: i64| -> (Rat, Rat) {
            let mut asn = BTreeMap::new();
            asn.insert("k".to_string(), rat_int(kv));
            asn.insert("n".to_string(), rat_int(nv));
            asn.insert("m".to_string(), rat_int(1));
            let fv = f.eval(&asn).unwrap();
            let rv = pair.certificate.eval(&asn).unwrap();
            (fv.clone(), fv * rv)
        };
        for nv in 2..8 {
            for kv in 1..nv {
                let lhs = at(nv + 1, kv).0 - at(nv, kv).0;
                let rhs = at(nv, kv + 1).1 - at(nv, kv).1;
                assert_eq!(lhs, rhs, "n={} k={}", nv, kv);
            }
        }
    }

    #[test]
    fn n_independent_term_gets_zero_certificate() {
        let v = vars();
        let f = binom(&v, LinExpr::var("m"), LinExpr::var("k"));
        let pair = wz_certify(&f).unwrap().unwrap();
        assert!(pair.certificate.is_zero());
    }

    #[test]
    fn creative_order_one_recovers_wz_coefficients() {
        let v = vars();
        let f = central_f(&v);
        let rel = creative_telescope(&f, 1).unwrap().unwrap();
        assert_eq!(rel.order, 1);
        assert_eq!(rel.coeffs.len(), 2);
        assert_eq!(rel.coeffs[1], RationalFunction::one(&v));
        assert_eq!(rel.coeffs[0], RationalFunction::one(&v).neg());
        // same certificate as the WZ route
        let pair = wz_certify(&f).unwrap().unwrap();
        assert_eq!(rel.certificate, pair.certificate);
    }

    #[test]
    fn unnormalized_binomial_has_first_order_relation() {
        let v = vars();
        let f = binom(&v, LinExpr::var("n"), LinExpr::var("k"));
        let rel = creative_telescope(&f, 4).unwrap().unwrap();
        assert_eq!(rel.order, 1);
        assert!(verify_relation(&f, &rel.coeffs, &rel.certificate)
            .unwrap()
            .is_zero());
        // Pascal-flavored: a_0 = -2, a_1 = 1 after normalization
        assert_eq!(
            rel.coeffs[0],
            rf(&v, &[(-2, &[0, 0, 0])], &[(1, &[0, 0, 0])])
        );
    }

    #[test]
    fn zero_max_order_is_a_precondition_error() {
        let v = vars();
        let f = central_f(&v);
        assert!(creative_telescope(&f, 0).is_err());
    }
}
