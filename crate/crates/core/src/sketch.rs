//! Compiles an identity plus its certificate into the proving-task pool:
//! normalization lemmas, the recurrence lemma, boundary obligations, side
//! conditions and case splits, each a machine-checkable goal with a stable
//! dedup id (a hash of its canonical self-contained statement).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::hyperterm::{poly_to_linexpr, HyperTerm, LinExpr, SupportAssumption};
use crate::leanemit::{
    goal_id, lean_constraint, lean_nat, lean_range_sum, lean_real_poly, lean_real_rf,
    lean_real_term,
};
use crate::parser::{print_identity, range_normalize, split_parity, CaseTag, Identity, REC_VAR, SUM_VAR};
use crate::symcore::{linear_factors, poly_integer_roots, Polynomial, Rat, RationalFunction, RootDesc, Vars};
use crate::telescope::{certify, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObligationKind {
    Rec,
    Bd,
    Side,
    Norm,
    Case,
}

impl ObligationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObligationKind::Rec => "rec",
            ObligationKind::Bd => "bd",
            ObligationKind::Side => "side",
            ObligationKind::Norm => "norm",
            ObligationKind::Case => "case",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "rec" => ObligationKind::Rec,
            "bd" => ObligationKind::Bd,
            "side" => ObligationKind::Side,
            "norm" => ObligationKind::Norm,
            "case" => ObligationKind::Case,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObligationStatus {
    Open,
    Discharged,
    Failed,
}

impl ObligationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ObligationStatus::Open => "open",
            ObligationStatus::Discharged => "discharged",
            ObligationStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Obligation {
    /// Stable hash of the canonical goal text; injective on goals.
    pub id: String,
    pub kind: ObligationKind,
    pub goal_internal: String,
    pub goal_lean: String,
    pub status: ObligationStatus,
    /// Which sketch step emitted it.
    pub provenance: String,
    /// For parity-split case obligations: the branch identity source text,
    /// re-enqueueable as an independent proving task.
    pub branch: Option<String>,
}

impl Obligation {
    fn new(
        kind: ObligationKind,
        goal_internal: String,
        goal_lean: String,
        provenance: &str,
    ) -> Self {
        Obligation {
            id: goal_id(&goal_internal),
            kind,
            goal_internal,
            goal_lean,
            status: ObligationStatus::Open,
            provenance: provenance.to_string(),
            branch: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaseCase {
    pub n0: i64,
    /// Exact value when parameter-free.
    pub value: Option<Rat>,
    /// Canonical text of the computed value (may involve parameters).
    pub value_text: String,
}

#[derive(Clone, Debug)]
pub struct ProofSketch {
    /// The identity as parsed.
    pub original: Identity,
    /// Range-normalized form (summation starting at 0).
    pub identity: Identity,
    /// Normalized summand F = f/r.
    pub normalized_term: HyperTerm,
    pub relation: Option<Relation>,
    pub base_case: Option<BaseCase>,
    pub obligations: Vec<Obligation>,
    pub uncovered: bool,
    pub warnings: Vec<String>,
}

impl ProofSketch {
    pub fn count_kind(&self, kind: ObligationKind) -> usize {
        self.obligations.iter().filter(|o| o.kind == kind).count()
    }

    pub fn open_obligations(&self) -> impl Iterator<Item = &Obligation> {
        self.obligations
            .iter()
            .filter(|o| o.status == ObligationStatus::Open)
    }
}

fn ctx(id: &Identity, extra_binders: &str, range_constraint: Option<&str>) -> String {
    let mut binders = vec![REC_VAR.to_string()];
    binders.extend(id.params.iter().cloned());
    if !extra_binders.is_empty() {
        binders.push(extra_binders.to_string());
    }
    let mut constraints: Vec<String> = id.assumptions.iter().map(|a| a.render()).collect();
    if let Some(rc) = range_constraint {
        constraints.push(rc.to_string());
    }
    if constraints.is_empty() {
        format!("forall {}", binders.join(" "))
    } else {
        format!("forall {} [{}]", binders.join(" "), constraints.join(", "))
    }
}

/// Lean binder prefix for an obligation goal. Parameters stay ambient
/// (fixed by the enclosing theorem), so only the recurrence and summation
/// variables are re-bound; assumptions are restated only when they mention
/// a re-bound variable.
fn lean_ctx(id: &Identity, with_k: bool, range_constraint: Option<&str>) -> String {
    let mut out = String::new();
    let mut nat_binders = vec![REC_VAR.to_string()];
    if with_k {
        nat_binders.push(SUM_VAR.to_string());
    }
    out.push_str(&format!("∀ {} : ℕ, ", nat_binders.join(" ")));
    for a in rebound_assumptions(id) {
        out.push_str(&format!("{} → ", lean_constraint(a)));
    }
    if let Some(rc) = range_constraint {
        out.push_str(&format!("{} → ", rc));
    }
    out
}

/// Assumptions that mention the re-bound variables (n or k) and therefore
/// must be restated inside obligation goals.
fn rebound_assumptions(id: &Identity) -> Vec<&crate::parser::Constraint> {
    id.assumptions
        .iter()
        .filter(|a| {
            let mentions = |e: &LinExpr| e.coeff(REC_VAR) != 0 || e.coeff(SUM_VAR) != 0;
            mentions(&a.lhs) || mentions(&a.rhs)
        })
        .collect()
}

/// Normalize the identity: F = f/r, one normalization-equivalence
/// obligation, and the normalizer-nonzero side obligation.
pub fn normalize_identity(id: &Identity) -> Result<(HyperTerm, Vec<Obligation>)> {
    let f = id.summand.div(&id.rhs)?;
    let mut out = Vec::new();
    let hi = id.sum_hi.render();
    let goal_internal = format!(
        "{}: (sum({}, 0, {}, {} / ({})) = 1) <-> (sum({}, 0, {}, {}) = {})",
        ctx(id, "", None),
        SUM_VAR,
        hi,
        id.summand.render(),
        id.rhs.render(),
        SUM_VAR,
        hi,
        id.summand.render(),
        id.rhs.render()
    );
    let goal_lean = format!(
        "{}({}) = 1 ↔ ({}) = B {}",
        lean_ctx(id, false, None),
        lean_range_sum(&id.sum_hi, &format!("A {} {} / B {}", REC_VAR, SUM_VAR, REC_VAR)),
        lean_range_sum(&id.sum_hi, &format!("A {} {}", REC_VAR, SUM_VAR)),
        REC_VAR
    );
    out.push(Obligation::new(
        ObligationKind::Norm,
        goal_internal,
        goal_lean,
        "normalize",
    ));
    if !id.rhs.is_constant_one() {
        let goal_internal = format!("{}: {} != 0", ctx(id, "", None), id.rhs.render());
        let goal_lean = format!(
            "{}({}) ≠ 0",
            lean_ctx(id, false, None),
            lean_real_term(&id.rhs)
        );
        out.push(Obligation::new(
            ObligationKind::Side,
            goal_internal,
            goal_lean,
            "normalizer_nonzero",
        ));
    }
    Ok((f, out))
}

/// Side conditions for a covered sketch: summand non-vanishing, one nonzero
/// goal per irreducible denominator factor of the certificate and both shift
/// ratios, isolated boundary indices, parity case splits, and conservative
/// goals for unresolved factors.
pub fn infer_side_conditions(
    id: &Identity,
    f: &HyperTerm,
    certificate: &RationalFunction,
) -> Result<Vec<Obligation>> {
    let mut out: Vec<Obligation> = Vec::new();
    let hi = &id.sum_hi;
    let range_internal = format!("0 <= {} <= {}", SUM_VAR, hi.render());
    let lean_range = format!("{} ≤ {}", SUM_VAR, lean_nat(hi));

    // summand non-vanishing over the open range (the paper's ne_zeroA shape)
    let strict = format!("{} < {}", SUM_VAR, lean_nat(hi));
    out.push(Obligation::new(
        ObligationKind::Side,
        format!(
            "{}: {} != 0 for summand {}",
            ctx(id, SUM_VAR, Some(&format!("0 <= {} < {}", SUM_VAR, hi.render()))),
            "A(n,k)",
            id.summand.render()
        ),
        format!(
            "{}(A {} {}) ≠ 0",
            lean_ctx(id, true, Some(&strict)),
            REC_VAR,
            SUM_VAR
        ),
        "summand_nonzero",
    ));

    let rho_k = f.ratio_shift(SUM_VAR)?;
    let rho_n = f.ratio_shift(REC_VAR)?;
    let assumptions = support_assumptions(id);
    let sources: [(&str, &Polynomial); 3] = [
        ("certificate", certificate.den()),
        ("ratio_k", rho_k.den()),
        ("ratio_n", rho_n.den()),
    ];
    let mut seen_factors: Vec<String> = Vec::new();
    for (source, den) in sources {
        if den.is_one() {
            continue;
        }
        let fac = linear_factors(den)?;
        let mut all: Vec<Polynomial> = fac.factors.iter().map(|(p, _)| p.clone()).collect();
        if let Some(res) = fac.residual {
            all.push(res);
        }
        for factor in all {
            let key = factor.render();
            if seen_factors.contains(&key) {
                continue;
            }
            seen_factors.push(key.clone());
            let uses_k = factor
                .vars()
                .index_of(SUM_VAR)
                .map(|i| factor.depends_on(i))
                .unwrap_or(false);
            let (goal_internal, goal_lean) = if uses_k {
                (
                    format!(
                        "{}: {} != 0",
                        ctx(id, SUM_VAR, Some(&range_internal)),
                        key
                    ),
                    format!(
                        "{}({}) ≠ 0",
                        lean_ctx(id, true, Some(&lean_range)),
                        lean_real_poly(&factor)
                    ),
                )
            } else {
                (
                    format!("{}: {} != 0", ctx(id, "", None), key),
                    format!(
                        "{}({}) ≠ 0",
                        lean_ctx(id, false, None),
                        lean_real_poly(&factor)
                    ),
                )
            };
            out.push(Obligation::new(
                ObligationKind::Side,
                goal_internal,
                goal_lean,
                &format!("denominator({})", source),
            ));
            if uses_k {
                emit_root_obligations(id, &factor, &mut out)?;
            }
        }
    }

    // well-definedness notes for the summand across the range
    let notes = f.term_support(SUM_VAR, &id.sum_lo, &id.sum_hi, &assumptions)?;
    for note in notes {
        let goal_internal = format!(
            "{}: well-definedness of factor {} ({})",
            ctx(id, SUM_VAR, Some(&range_internal)),
            note.factor,
            note.condition
        );
        let goal_lean = format!(
            "{}(A {} {}) = A {} {}  -- requires explicit handling: {}",
            lean_ctx(id, true, Some(&lean_range)),
            REC_VAR,
            SUM_VAR,
            REC_VAR,
            SUM_VAR,
            note.condition
        );
        out.push(Obligation::new(
            ObligationKind::Side,
            goal_internal,
            goal_lean,
            "support",
        ));
    }
    Ok(out)
}

/// Roots of a denominator factor inside the summation range become isolated
/// boundary-index subgoals; parity-conditioned roots become case splits.
fn emit_root_obligations(
    id: &Identity,
    factor: &Polynomial,
    out: &mut Vec<Obligation>,
) -> Result<()> {
    let roots = poly_integer_roots(factor, SUM_VAR, None)?;
    for root in roots {
        match root {
            RootDesc::Integer(v) => {
                if root_possibly_in_range(id, &LinExpr::constant(bigint_i64(&v)?)) {
                    push_isolated(id, factor, &LinExpr::constant(bigint_i64(&v)?), out);
                }
            }
            RootDesc::Linear { expr, den } => {
                if den.is_one() {
                    if let Some(lin) = poly_to_linexpr(&expr) {
                        if root_possibly_in_range(id, &lin) {
                            push_isolated(id, factor, &lin, out);
                        }
                    }
                } else if den == BigInt::from(2) && id.case_tag == CaseTag::None {
                    // parity-dependent root: split the identity
                    let (even, odd) = split_parity(id)?;
                    for branch in [even, odd] {
                        let text = print_identity(&branch);
                        let goal_internal = format!(
                            "case[{}]: {}",
                            match branch.case_tag {
                                CaseTag::Even => "even",
                                CaseTag::Odd => "odd",
                                CaseTag::None => "none",
                            },
                            text
                        );
                        let goal_lean = crate::leanemit::lean_statement(&branch);
                        let mut ob = Obligation::new(
                            ObligationKind::Case,
                            goal_internal,
                            goal_lean,
                            &format!("parity_split({})", factor.render()),
                        );
                        ob.branch = Some(text);
                        out.push(ob);
                    }
                } else {
                    // non-parity divisibility: conservative side note
                    let goal_internal = format!(
                        "{}: {} != 0 (root {} = ({})/{} needs a divisibility argument)",
                        ctx(id, SUM_VAR, Some(&format!("0 <= {} <= {}", SUM_VAR, id.sum_hi.render()))),
                        factor.render(),
                        SUM_VAR,
                        expr.render(),
                        den
                    );
                    let goal_lean = format!(
                        "{}({}) ≠ 0",
                        lean_ctx(id, true, Some(&format!("{} ≤ {}", SUM_VAR, lean_nat(&id.sum_hi)))),
                        lean_real_poly(factor)
                    );
                    out.push(Obligation::new(
                        ObligationKind::Side,
                        goal_internal,
                        goal_lean,
                        "divisibility",
                    ));
                }
            }
            RootDesc::Unresolved(p) => {
                let goal_internal = format!(
                    "{}: {} != 0 (unresolved nonlinear factor, conservative)",
                    ctx(id, SUM_VAR, Some(&format!("0 <= {} <= {}", SUM_VAR, id.sum_hi.render()))),
                    p.render()
                );
                let goal_lean = format!(
                    "{}({}) ≠ 0",
                    lean_ctx(id, true, Some(&format!("{} ≤ {}", SUM_VAR, lean_nat(&id.sum_hi)))),
                    lean_real_poly(&p)
                );
                out.push(Obligation::new(
                    ObligationKind::Side,
                    goal_internal,
                    goal_lean,
                    "unresolved_factor",
                ));
            }
        }
    }
    Ok(())
}

fn bigint_i64(v: &BigInt) -> Result<i64> {
    use num_traits::ToPrimitive;
    v.to_i64()
        .ok_or_else(|| Error::Invalid("root out of i64 range".into()))
}

fn push_isolated(id: &Identity, factor: &Polynomial, at: &LinExpr, out: &mut Vec<Obligation>) {
    let goal_internal = format!(
        "{}: pointwise relation at isolated index {} = {} where factor {} vanishes",
        ctx(id, "", None),
        SUM_VAR,
        at.render(),
        factor.render()
    );
    let goal_lean = format!(
        "{}F ({} + 1) ({}) - F {} ({}) = G {} (({}) + 1) - G {} ({})",
        lean_ctx(id, false, None),
        REC_VAR,
        lean_nat(at),
        REC_VAR,
        lean_nat(at),
        REC_VAR,
        lean_nat(at),
        REC_VAR,
        lean_nat(at)
    );
    out.push(Obligation::new(
        ObligationKind::Side,
        goal_internal,
        goal_lean,
        "isolated_index",
    ));
}

/// Conservative inside-range check for a candidate root expression.
fn root_possibly_in_range(id: &Identity, root: &LinExpr) -> bool {
    let assumptions = support_assumptions(id);
    // below range: root - hi > 0 always, or root < 0 always => outside
    let above = root.sub(&id.sum_hi);
    let (amin, _) = lin_bounds_pub(&above, &assumptions);
    if amin.map(|x| x > 0).unwrap_or(false) {
        return false;
    }
    let (_, rmax) = lin_bounds_pub(root, &assumptions);
    if rmax.map(|x| x < 0).unwrap_or(false) {
        return false;
    }
    true
}

fn support_assumptions(id: &Identity) -> Vec<SupportAssumption> {
    use crate::parser::ConstraintOp;
    let mut out = Vec::new();
    for a in &id.assumptions {
        // recognize `x >= c` and `x > c` single-variable lower bounds
        if a.lhs.coeffs.len() == 1 && a.rhs.is_constant() {
            let (v, &c) = a.lhs.coeffs.iter().next().unwrap();
            if c == 1 && a.lhs.constant == 0 {
                match a.op {
                    ConstraintOp::Ge => out.push(SupportAssumption {
                        var: v.clone(),
                        lower: a.rhs.constant,
                    }),
                    ConstraintOp::Gt => out.push(SupportAssumption {
                        var: v.clone(),
                        lower: a.rhs.constant + 1,
                    }),
                    _ => {}
                }
            }
        }
    }
    out
}

/// Interval bounds helper shared with the support checker.
fn lin_bounds_pub(
    e: &LinExpr,
    assumptions: &[SupportAssumption],
) -> (Option<i64>, Option<i64>) {
    let mut lo = Some(e.constant);
    let mut hi = Some(e.constant);
    for (v, c) in &e.coeffs {
        let lower = assumptions
            .iter()
            .find(|a| &a.var == v)
            .map(|a| a.lower)
            .or_else(|| if v == "n" || v == "k" { Some(0) } else { None });
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

/// Ratio-lemma obligations: the k- and n-shift ratios of the summand and
/// the n-shift ratio of the right-hand side, with CAS-computed closed forms.
pub fn ratio_lemma_obligations(id: &Identity) -> Result<Vec<Obligation>> {
    let mut out = Vec::new();
    let specs: [(&str, &HyperTerm, &str, &str); 3] = [
        ("ratio_lemma_k", &id.summand, SUM_VAR, "A"),
        ("ratio_lemma_n", &id.summand, REC_VAR, "A"),
        ("ratio_lemma_rhs", &id.rhs, REC_VAR, "B"),
    ];
    for (provenance, term, var, name) in specs {
        let ratio = term.ratio_shift(var)?;
        let (lhs_internal, lhs_lean) = if name == "A" {
            if var == SUM_VAR {
                (
                    format!("A({0},{1}+1)/A({0},{1})", REC_VAR, SUM_VAR),
                    format!("A {0} ({1} + 1) / A {0} {1}", REC_VAR, SUM_VAR),
                )
            } else {
                (
                    format!("A({0}+1,{1})/A({0},{1})", REC_VAR, SUM_VAR),
                    format!("A ({0} + 1) {1} / A {0} {1}", REC_VAR, SUM_VAR),
                )
            }
        } else {
            (
                format!("B({0}+1)/B({0})", REC_VAR),
                format!("B ({0} + 1) / B {0}", REC_VAR),
            )
        };
        let strict = format!("{} < {}", SUM_VAR, lean_nat(&id.sum_hi));
        let with_k = name == "A";
        let range = if with_k {
            Some(format!("0 <= {} < {}", SUM_VAR, id.sum_hi.render()))
        } else {
            None
        };
        let goal_internal = format!(
            "{}: {} = {} for A := {}; B := {}",
            ctx(id, if with_k { SUM_VAR } else { "" }, range.as_deref()),
            lhs_internal,
            ratio.render(),
            id.summand.render(),
            id.rhs.render()
        );
        let goal_lean = format!(
            "{}{} = {}",
            lean_ctx(id, with_k, if with_k { Some(&strict) } else { None }),
            lhs_lean,
            lean_real_rf(&ratio)
        );
        out.push(Obligation::new(
            ObligationKind::Side,
            goal_internal,
            goal_lean,
            provenance,
        ));
    }
    Ok(out)
}

/// Smallest admissible base index and the exact normalized sum there.
fn compute_base_case(
    id: &Identity,
    f: &HyperTerm,
    order: u32,
) -> (Option<BaseCase>, Vec<BaseCase>, Vec<String>) {
    let mut warnings = Vec::new();
    let param_vars = Vars::new(id.params.clone());
    let n_assumptions: Vec<_> = id
        .assumptions
        .iter()
        .filter(|a| {
            a.lhs.vars_used().iter().all(|v| v == REC_VAR)
                && a.rhs.vars_used().iter().all(|v| v == REC_VAR)
        })
        .collect();
    let admissible = |n: i64| -> bool {
        let mut asn = BTreeMap::new();
        asn.insert(REC_VAR.to_string(), crate::symcore::rat_int(n));
        n_assumptions
            .iter()
            .all(|a| a.holds(&asn).unwrap_or(false))
    };
    let eval_at = |n0: i64| -> Result<RationalFunction> {
        let mut fixed: BTreeMap<String, BigInt> = BTreeMap::new();
        fixed.insert(REC_VAR.to_string(), BigInt::from(n0));
        let hi = {
            let mut asn = BTreeMap::new();
            asn.insert(REC_VAR.to_string(), crate::symcore::rat_int(n0));
            id.sum_hi.eval_int(&asn)?
        };
        let mut acc = RationalFunction::zero(&param_vars);
        let mut k = BigInt::from(0);
        while k <= hi {
            let mut fx = fixed.clone();
            fx.insert(SUM_VAR.to_string(), k.clone());
            acc = acc.add(&f.eval_symbolic(&fx, &param_vars)?)?;
            k += 1;
        }
        Ok(acc)
    };
    let mut bases: Vec<BaseCase> = Vec::new();
    let mut n0 = None;
    for cand in 0..=24i64 {
        if !admissible(cand) {
            continue;
        }
        match eval_at(cand) {
            Ok(v) => {
                n0 = Some(cand);
                let value = v.as_constant();
                if !v.is_one() {
                    warnings.push(format!(
                        "statement check: normalized base value at {} = {} is {}, expected 1",
                        REC_VAR,
                        cand,
                        v.render()
                    ));
                }
                bases.push(BaseCase {
                    n0: cand,
                    value,
                    value_text: v.render(),
                });
                break;
            }
            Err(_) => continue,
        }
    }
    let Some(n0) = n0 else {
        warnings.push("no admissible base index found in 0..=24".to_string());
        return (None, bases, warnings);
    };
    // higher-order relations need `order` consecutive base values
    for extra in 1..order as i64 {
        match eval_at(n0 + extra) {
            Ok(v) => bases.push(BaseCase {
                n0: n0 + extra,
                value: v.as_constant(),
                value_text: v.render(),
            }),
            Err(e) => warnings.push(format!(
                "could not compute base value at {} = {}: {}",
                REC_VAR,
                n0 + extra,
                e
            )),
        }
    }
    (bases.first().cloned(), bases, warnings)
}

/// Build the full proof sketch for a parsed identity.
pub fn build_sketch(input: &Identity, max_order: u32) -> Result<ProofSketch> {
    let (id, range_obs) = range_normalize(input)?;
    let mut obligations: Vec<Obligation> = Vec::new();
    for ob in &range_obs {
        let goal_internal = format!("{}: {}", ctx(&id, "", None), ob.statement);
        let lo = &input.sum_lo;
        let goal_lean = format!(
            "{}(∑ {} ∈ Finset.Icc ({}) ({}), {}) = {}",
            lean_ctx(&id, false, None),
            SUM_VAR,
            lean_nat(lo),
            lean_nat(&input.sum_hi),
            lean_real_term(&input.summand),
            lean_range_sum(&id.sum_hi, &lean_real_term(&id.summand))
        );
        obligations.push(Obligation::new(
            ObligationKind::Norm,
            goal_internal,
            goal_lean,
            "range_shift",
        ));
    }
    let (f, norm_obs) = normalize_identity(&id)?;
    let relation = certify(&f, max_order)?;
    let Some(relation) = relation else {
        // WZ-uncovered: the identity itself becomes a direct-prove goal
        return Ok(ProofSketch {
            original: input.clone(),
            identity: id,
            normalized_term: f,
            relation: None,
            base_case: None,
            obligations: vec![],
            uncovered: true,
            warnings: vec![],
        });
    };
    obligations.extend(norm_obs);

    let hi = &id.sum_hi;
    let f_text = f.render();
    // recurrence lemma
    let rec_ob = match &relation {
        Relation::Wz(_) => {
            let goal_internal = format!(
                "{}: S({}+1) - S({}) = 0 where S({}) := sum({}, 0, {}, F); F := {}",
                ctx(&id, "", None),
                REC_VAR,
                REC_VAR,
                REC_VAR,
                SUM_VAR,
                hi.render(),
                f_text
            );
            let goal_lean = format!(
                "{}f ({} + 1) - f {} = 0",
                lean_ctx(&id, false, None),
                REC_VAR,
                REC_VAR
            );
            Obligation::new(ObligationKind::Rec, goal_internal, goal_lean, "recurrence")
        }
        Relation::Creative(rel) => {
            let mut terms_internal = Vec::new();
            let mut terms_lean = Vec::new();
            for (j, a) in rel.coeffs.iter().enumerate() {
                terms_internal.push(format!("({}) * S({}+{})", a.render(), REC_VAR, j));
                terms_lean.push(format!(
                    "{} * f ({} + {})",
                    lean_real_rf(a),
                    REC_VAR,
                    j
                ));
            }
            let goal_internal = format!(
                "{}: {} = 0 where S({}) := sum({}, 0, {}, F); F := {}",
                ctx(&id, "", None),
                terms_internal.join(" + "),
                REC_VAR,
                SUM_VAR,
                hi.render(),
                f_text
            );
            let goal_lean = format!(
                "{}{} = 0",
                lean_ctx(&id, false, None),
                terms_lean.join(" + ")
            );
            Obligation::new(ObligationKind::Rec, goal_internal, goal_lean, "recurrence")
        }
    };
    obligations.push(rec_ob);

    // boundary obligations at k = 0 and k = hi + 1
    let cert = relation.certificate().clone();
    let cert_text = cert.render();
    for (at_internal, at_lean, which) in [
        ("0".to_string(), "0".to_string(), "lower"),
        (
            format!("{}+1", hi.render()),
            format!("({} + 1)", lean_nat(hi)),
            "upper",
        ),
    ] {
        let goal_internal = format!(
            "{}: G({}, {}) = 0 where G := R*F; R := {}; F := {}",
            ctx(&id, "", None),
            REC_VAR,
            at_internal,
            cert_text,
            f_text
        );
        let goal_lean = format!(
            "{}G {} {} = 0",
            lean_ctx(&id, false, None),
            REC_VAR,
            at_lean
        );
        obligations.push(Obligation::new(
            ObligationKind::Bd,
            goal_internal,
            goal_lean,
            &format!("boundary_{}", which),
        ));
    }

    // base case(s)
    let (base_case, all_bases, mut warnings) = compute_base_case(&id, &f, relation.order());
    for b in &all_bases {
        let goal_internal = format!(
            "{}: S({}) = {} where S({}) := sum({}, 0, {}, F); F := {}",
            ctx(&id, "", None),
            b.n0,
            b.value_text,
            REC_VAR,
            SUM_VAR,
            hi.render(),
            f_text
        );
        let goal_lean = format!("f {} = {}", b.n0, b.value_text);
        obligations.push(Obligation::new(
            ObligationKind::Case,
            goal_internal,
            goal_lean,
            "base_case",
        ));
    }

    // ratio lemmas and side conditions
    obligations.extend(ratio_lemma_obligations(&id)?);
    obligations.extend(infer_side_conditions(&id, &f, &cert)?);

    // higher-order relations delegate the constant-extraction step
    if relation.order() > 1 {
        let goal_internal = format!(
            "{}: S({}) = 1 for all admissible {} (from the order-{} recurrence and its base values); F := {}",
            ctx(&id, "", None),
            REC_VAR,
            REC_VAR,
            relation.order(),
            f_text
        );
        let goal_lean = format!(
            "{}f {} = 1",
            lean_ctx(&id, false, None),
            REC_VAR
        );
        obligations.push(Obligation::new(
            ObligationKind::Case,
            goal_internal,
            goal_lean,
            "conclusion",
        ));
    }

    // dedup by goal id, first provenance wins
    let mut seen: Vec<String> = Vec::new();
    let mut deduped: Vec<Obligation> = Vec::new();
    for ob in obligations {
        if seen.contains(&ob.id) {
            continue;
        }
        seen.push(ob.id.clone());
        deduped.push(ob);
    }

    if base_case.is_none() {
        warnings.push("base case could not be computed".to_string());
    }

    Ok(ProofSketch {
        original: input.clone(),
        identity: id,
        normalized_term: f,
        relation: Some(relation),
        base_case,
        obligations: deduped,
        uncovered: false,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_identity;
    use crate::symcore::rat_int;

    const CENTRAL: &str = "sum(k, 0, n, binom(n,k)^2) = binom(2*n,n)";
    const ALT_RECIP: &str = "params m;\nassume m >= 1;\nsum(k, 0, n, (-1)^k * binom(n,k) * m/(m+k)) = 1/binom(m+n,n)";

    #[test]
    fn central_sketch_structure() {
        let id = parse_identity(CENTRAL).unwrap();
        let sk = build_sketch(&id, 4).unwrap();
        assert!(!sk.uncovered);
        assert_eq!(sk.count_kind(ObligationKind::Rec), 1);
        assert_eq!(sk.count_kind(ObligationKind::Bd), 2);
        assert_eq!(sk.count_kind(ObligationKind::Norm), 1);
        assert!(sk.count_kind(ObligationKind::Side) >= 2);
        let base = sk.base_case.as_ref().unwrap();
        assert_eq!(base.n0, 0);
        assert_eq!(base.value, Some(rat_int(1)));
        // side obligations cover the certificate denominator factors
        let side_texts: Vec<&str> = sk
            .obligations
            .iter()
            .filter(|o| o.kind == ObligationKind::Side)
            .map(|o| o.goal_internal.as_str())
            .collect();
        assert!(side_texts.iter().any(|t| t.contains("k - n - 1")));
        assert!(side_texts.iter().any(|t| t.contains("2*n + 1")));
        assert!(sk.warnings.is_empty(), "{:?}", sk.warnings);
    }

    #[test]
    fn alternating_sketch_ratio_lemmas_match_closed_forms() {
        let id = parse_identity(ALT_RECIP).unwrap();
        let sk = build_sketch(&id, 4).unwrap();
        assert!(!sk.uncovered);
        let ratio_k = sk
            .obligations
            .iter()
            .find(|o| o.provenance == "ratio_lemma_k")
            .unwrap();
        // -(n-k)(k+m)/((k+m+1)(k+1)) expands to the canonical form below
        assert!(
            ratio_k.goal_internal.contains("(k^2 - k*n + k*m - n*m)"),
            "{}",
            ratio_k.goal_internal
        );
        let ratio_rhs = sk
            .obligations
            .iter()
            .find(|o| o.provenance == "ratio_lemma_rhs")
            .unwrap();
        assert!(
            ratio_rhs.goal_internal.contains("(n + 1)/(m + n + 1)")
                || ratio_rhs.goal_internal.contains("(n + 1)/(n + m + 1)"),
            "{}",
            ratio_rhs.goal_internal
        );
        let rec = sk
            .obligations
            .iter()
            .find(|o| o.kind == ObligationKind::Rec)
            .unwrap();
        assert!(rec.goal_lean.contains("f (n + 1) - f n = 0"));
    }

    #[test]
    fn pool_partition_is_total() {
        let id = parse_identity(CENTRAL).unwrap();
        let sk = build_sketch(&id, 4).unwrap();
        let total: usize = [
            ObligationKind::Rec,
            ObligationKind::Bd,
            ObligationKind::Side,
            ObligationKind::Norm,
            ObligationKind::Case,
        ]
        .iter()
        .map(|&k| sk.count_kind(k))
        .sum();
        assert_eq!(total, sk.obligations.len());
        // ids are unique
        let mut ids: Vec<&str> = sk.obligations.iter().map(|o| o.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), sk.obligations.len());
    }

    #[test]
    fn uncovered_identity_yields_empty_pool() {
        // 1/(n^2 + k + 1): hypergeometric but not WZ-coverable
        let id = parse_identity("sum(k, 0, n, 1/(n*n + k + 1)) = 1").unwrap();
        let sk = build_sketch(&id, 2).unwrap();
        assert!(sk.uncovered);
        assert!(sk.obligations.is_empty());
        assert!(sk.relation.is_none());
    }

    #[test]
    fn rhs_one_skips_division_and_normalizer_goal() {
        let id = parse_identity("sum(k, 0, n, binom(n,k)/2^n) = 1").unwrap();
        let sk = build_sketch(&id, 4).unwrap();
        assert!(!sk.uncovered);
        assert_eq!(sk.normalized_term.render(), id.summand.render());
        assert!(sk
            .obligations
            .iter()
            .all(|o| o.provenance != "normalizer_nonzero"));
        assert_eq!(sk.count_kind(ObligationKind::Norm), 1);
    }

    #[test]
    fn shifted_range_adds_norm_obligation() {
        let id = parse_identity("sum(k, 1, n+1, binom(n, k-1)/2^n) = 1").unwrap();
        let sk = build_sketch(&id, 4).unwrap();
        assert_eq!(sk.count_kind(ObligationKind::Norm), 2);
        assert!(sk
            .obligations
            .iter()
            .any(|o| o.provenance == "range_shift"));
    }

    #[test]
    fn parity_dependent_factor_splits_cases() {
        let id = parse_identity(CENTRAL).unwrap();
        let (norm_id, _) = range_normalize(&id).unwrap();
        let (f, _) = normalize_identity(&norm_id).unwrap();
        // synthetic certificate with denominator n - 2k
        let vars = norm_id.vars().clone();
        let n = Polynomial::var(&vars, "n").unwrap();
        let k2 = Polynomial::var(&vars, "k").unwrap().scale(&rat_int(2));
        let den = n.sub(&k2).unwrap();
        let cert = RationalFunction::new(Polynomial::one(&vars), den).unwrap();
        let obs = infer_side_conditions(&norm_id, &f, &cert).unwrap();
        let cases: Vec<_> = obs
            .iter()
            .filter(|o| o.kind == ObligationKind::Case)
            .collect();
        assert_eq!(cases.len(), 2);
        assert!(cases.iter().any(|o| o.goal_internal.starts_with("case[even]")));
        assert!(cases.iter().any(|o| o.goal_internal.starts_with("case[odd]")));
        assert!(cases.iter().all(|o| o.branch.is_some()));
    }

    #[test]
    fn base_case_skips_inadmissible_indices() {
        // rhs n*2^(n-1) vanishes at n = 0; base moves to n = 1
        let id =
            parse_identity("assume n >= 1;\nsum(k, 0, n, k * binom(n,k)) = n * 2^(n-1)").unwrap();
        let sk = build_sketch(&id, 4).unwrap();
        assert!(!sk.uncovered);
        let base = sk.base_case.as_ref().unwrap();
        assert_eq!(base.n0, 1);
        assert_eq!(base.value, Some(rat_int(1)));
        assert!(sk.warnings.is_empty(), "{:?}", sk.warnings);
    }
}
