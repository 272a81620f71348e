//! Exact linear algebra over the rational-function field, used to solve
//! Gosper key equations (with parameters flowing through symbolically).

use super::rf::RationalFunction;
use crate::error::Result;

/// Row-reduce [a | b] and return a particular solution with all free
/// variables set to zero, or None when the system is inconsistent.
pub fn solve_linear(
    a: &[Vec<RationalFunction>],
    b: &[RationalFunction],
) -> Result<Option<Vec<RationalFunction>>> {
    let rows = a.len();
    if rows == 0 {
        return Ok(Some(vec![]));
    }
    let cols = a[0].len();
    let vars = if cols > 0 {
        a[0][0].vars().clone()
    } else {
        b[0].vars().clone()
    };
    let mut m: Vec<Vec<RationalFunction>> = Vec::with_capacity(rows);
    for (r, row) in a.iter().enumerate() {
        let mut v = row.clone();
        v.push(b[r].clone());
        m.push(v);
    }
    let (echelon, pivots) = row_reduce(&mut m, cols)?;
    // inconsistency: pivot in the augmented column
    for row in &echelon {
        let lhs_zero = row[..cols].iter().all(|x| x.is_zero());
        if lhs_zero && !row[cols].is_zero() {
            return Ok(None);
        }
    }
    let mut x = vec![RationalFunction::zero(&vars); cols];
    for (ri, &pc) in pivots.iter().enumerate() {
        // row ri: x[pc] = rhs - sum_{c > pc, non-pivot} a[c]*x[c]; free vars are 0
        let mut acc = echelon[ri][cols].clone();
        for c in pc + 1..cols {
            if !echelon[ri][c].is_zero() && !x[c].is_zero() {
                acc = acc.sub(&echelon[ri][c].mul(&x[c])?)?;
            }
        }
        x[pc] = acc;
    }
    Ok(Some(x))
}

/// Basis of the null space of `a`, each vector normalized so its last
/// nonzero entry is 1. Deterministic: one vector per free column, in
/// column order.
pub fn null_space(a: &[Vec<RationalFunction>]) -> Result<Vec<Vec<RationalFunction>>> {
    let rows = a.len();
    if rows == 0 {
        return Ok(vec![]);
    }
    let cols = a[0].len();
    let vars = a[0][0].vars().clone();
    let mut m: Vec<Vec<RationalFunction>> = a.to_vec();
    let (echelon, pivots) = row_reduce(&mut m, cols)?;
    let is_pivot: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = Some(ri);
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut vec_x = vec![RationalFunction::zero(&vars); cols];
        vec_x[free] = RationalFunction::one(&vars);
        // pivots in reverse order
        for (ri, &pc) in pivots.iter().enumerate().rev() {
            let mut acc = RationalFunction::zero(&vars);
            for c in pc + 1..cols {
                if !echelon[ri][c].is_zero() && !vec_x[c].is_zero() {
                    acc = acc.add(&echelon[ri][c].mul(&vec_x[c])?)?;
                }
            }
            vec_x[pc] = acc.neg();
        }
        basis.push(vec_x);
    }
    Ok(basis)
}

/// In-place Gaussian elimination to reduced row echelon with unit pivots.
/// Returns the reduced matrix and the pivot column per pivot row.
fn row_reduce(
    m: &mut [Vec<RationalFunction>],
    cols: usize,
) -> Result<(Vec<Vec<RationalFunction>>, Vec<usize>)> {
    let rows = m.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let pivot_row = (row..rows).find(|&r| !m[r][col].is_zero());
        let pr = match pivot_row {
            Some(pr) => pr,
            None => continue,
        };
        m.swap(row, pr);
        let inv = m[row][col].recip()?;
        for c in col..m[row].len() {
            if !m[row][c].is_zero() {
                m[row][c] = m[row][c].mul(&inv)?;
            }
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..m[r].len() {
                    if !m[row][c].is_zero() {
                        let t = m[row][c].mul(&factor)?;
                        m[r][c] = m[r][c].sub(&t)?;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    Ok((m.to_vec(), pivots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::poly::{rat_int, Vars};

    fn c(vars: &Vars, v: i64) -> RationalFunction {
        RationalFunction::constant(vars, rat_int(v))
    }

    #[test]
    fn solves_square_system() {
        let vars = Vars::new(vec!["n"]);
        // x + y = 3; x - y = 1 -> x = 2, y = 1
        let a = vec![
            vec![c(&vars, 1), c(&vars, 1)],
            vec![c(&vars, 1), c(&vars, -1)],
        ];
        let b = vec![c(&vars, 3), c(&vars, 1)];
        let x = solve_linear(&a, &b).unwrap().unwrap();
        assert_eq!(x[0], c(&vars, 2));
        assert_eq!(x[1], c(&vars, 1));
    }

    #[test]
    fn detects_inconsistency() {
        let vars = Vars::new(vec!["n"]);
        let a = vec![vec![c(&vars, 1)], vec![c(&vars, 1)]];
        let b = vec![c(&vars, 1), c(&vars, 2)];
        assert!(solve_linear(&a, &b).unwrap().is_none());
    }

    #[test]
    fn parametric_coefficients_flow_through() {
        let vars = Vars::new(vec!["n"]);
        let n = RationalFunction::var(&vars, "n").unwrap();
        // (n+1) x = 1 -> x = 1/(n+1)
        let np1 = n.add(&c(&vars, 1)).unwrap();
        let a = vec![vec![np1.clone()]];
        let b = vec![c(&vars, 1)];
        let x = solve_linear(&a, &b).unwrap().unwrap();
        assert_eq!(x[0], np1.recip().unwrap());
    }

    #[test]
    fn null_space_of_rank_deficient() {
        let vars = Vars::new(vec!["n"]);
        // x + y + z = 0 and 2x + 2y + 2z = 0: null space rank 2
        let a = vec![
            vec![c(&vars, 1), c(&vars, 1), c(&vars, 1)],
            vec![c(&vars, 2), c(&vars, 2), c(&vars, 2)],
        ];
        let ns = null_space(&a).unwrap();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let mut acc = RationalFunction::zero(&vars);
            for x in v {
                acc = acc.add(x).unwrap();
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn free_variables_are_zero_in_particular_solution() {
        let vars = Vars::new(vec!["n"]);
        // x + y = 1 -> particular solution (1, 0)
        let a = vec![vec![c(&vars, 1), c(&vars, 1)]];
        let b = vec![c(&vars, 1)];
        let x = solve_linear(&a, &b).unwrap().unwrap();
        assert_eq!(x[0], c(&vars, 1));
        assert!(x[1].is_zero());
    }
}
