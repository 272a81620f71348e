//! Exact arbitrary-precision arithmetic for multivariate polynomials and
//! rational functions: the algebra every certificate computation sits on.
//! No floating point anywhere; equality of canonical forms is structural.

mod gcd;
mod linalg;
mod poly;
mod rf;
mod roots;

pub use gcd::{content_in, poly_gcd, poly_lcm, primitive_in, resultant_in};
pub use linalg::{null_space, solve_linear};
pub use poly::{rat, rat_int, render_rat, Mono, Polynomial, Rat, Vars};
pub use rf::{common_denominator, RationalFunction};
pub use roots::{linear_factors, poly_integer_roots, Factorization, RootDesc};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn poly_arith(a: &Polynomial, b: &Polynomial, op: PolyOp) -> Result<Polynomial> {
    match op {
        PolyOp::Add => a.add(b),
        PolyOp::Sub => a.sub(b),
        PolyOp::Mul => a.mul(b),
    }
}

pub fn rf_canonical(num: Polynomial, den: Polynomial) -> Result<RationalFunction> {
    RationalFunction::new(num, den)
}

pub fn rf_arith(
    a: &RationalFunction,
    b: &RationalFunction,
    op: RfOp,
) -> Result<RationalFunction> {
    match op {
        RfOp::Add => a.add(b),
        RfOp::Sub => a.sub(b),
        RfOp::Mul => a.mul(b),
        RfOp::Div => a.div(b),
    }
}

pub fn rf_shift(a: &RationalFunction, var: &str, offset: i64) -> Result<RationalFunction> {
    a.shift(var, offset)
}

pub fn rf_eval(
    a: &RationalFunction,
    assignment: &std::collections::BTreeMap<String, Rat>,
) -> Result<Rat> {
    a.eval(assignment)
}
