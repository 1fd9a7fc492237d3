//! Dense two-phase simplex over exact rationals (Bland's rule).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    pub rhs: Q,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

/// Minimise `c·x` subject to `rows` and `x ≥ 0`.
pub fn minimize(c: &[Q], rows: &[Row]) -> LpOutcome {
    let nv = c.len();
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let cols = nv + n_slack + m; // structural, slack, artificial
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack = nv;
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.coeffs.len(), nv, "row width mismatch");
        let mut row = vec![Q::zero(); cols + 1];
        row[..nv].clone_from_slice(&r.coeffs);
        match r.relation {
            Relation::Ge => {
                row[slack] = -Q::one();
                slack += 1;
            }
            Relation::Le => {
                row[slack] = Q::one();
                slack += 1;
            }
            Relation::Eq => {}
        }
        row[cols] = r.rhs.clone();
        if row[cols].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[nv + n_slack + i] = Q::one();
        basis.push(nv + n_slack + i);
        t.push(row);
    }
    // phase 1: minimise the sum of artificials
    let mut cost1 = vec![Q::zero(); cols];
    cost1[nv + n_slack..].fill(Q::one());
    if !run(&mut t, &mut basis, &cost1, cols) {
        return LpOutcome::Unbounded;
    }
    let infeas: Q = basis
        .iter()
        .zip(&t)
        .filter(|(b, _)| **b >= nv + n_slack)
        .map(|(_, r)| r[cols].clone())
        .fold(Q::zero(), |a, b| a + b);
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // drive remaining (zero-valued) artificials out of the basis
    for i in 0..m {
        if basis[i] >= nv + n_slack {
            if let Some(j) = (0..nv + n_slack).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    // phase 2 with artificial columns barred
    let mut cost2 = vec![Q::zero(); cols];
    cost2[..nv].clone_from_slice(c);
    for row in t.iter_mut() {
        row[nv + n_slack..cols].fill(Q::zero());
    }
    if !run(&mut t, &mut basis, &cost2, nv + n_slack) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); nv];
    for (i, &b) in basis.iter().enumerate() {
        if b < nv {
            x[b] = t[i][cols].clone();
        }
    }
    let value = c.iter().zip(&x).fold(Q::zero(), |a, (ci, xi)| a + ci * xi);
    LpOutcome::Optimal { x, value }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        *v = &*v / &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v = &*v - &f * pv;
            }
        }
    }
    basis[r] = c;
}

/// Primal simplex on columns `0..allowed`; returns false if unbounded.
fn run(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: usize) -> bool {
    let cols = cost.len();
    loop {
        // reduced costs d_j = c_j − c_B · column_j
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut d = cost[j].clone();
            for (i, &b) in basis.iter().enumerate() {
                if !t[i][j].is_zero() {
                    d -= &cost[b] * &t[i][j];
                }
            }
            d.is_negative()
        });
        let Some(j) = entering else { return true };
        let mut best: Option<(usize, Q)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][cols] / &t[i][j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = best else { return false };
        pivot(t, basis, r, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: &[i64], rel: Relation, rhs: i64) -> Row {
        Row { coeffs: c.iter().map(|&v| q(v)).collect(), relation: rel, rhs: q(rhs) }
    }

    #[test]
    fn small_problem() {
        // min x + y  s.t. x + 2y ≥ 4, 3x + y ≥ 6
        let rows = [row(&[1, 2], Relation::Ge, 4), row(&[3, 1], Relation::Ge, 6)];
        match minimize(&[q(1), q(1)], &rows) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, Q::new(14.into(), 5.into()));
                assert_eq!(x, vec![Q::new(8.into(), 5.into()), Q::new(6.into(), 5.into())]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let rows = [row(&[1], Relation::Le, 1), row(&[1], Relation::Ge, 2)];
        assert_eq!(minimize(&[q(1)], &rows), LpOutcome::Infeasible);
        let rows = [row(&[1], Relation::Ge, 2)];
        assert_eq!(minimize(&[q(-1)], &rows), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_rows() {
        let rows = [row(&[1, 1], Relation::Eq, 3), row(&[1, -1], Relation::Le, -1)];
        match minimize(&[q(1), q(0)], &rows) {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, vec![q(0), q(3)]),
            other => panic!("{other:?}"),
        }
    }
}
