//! Exact bounded-variable primal simplex over `BigRational`, two phases,
//! Bland's rule for both the entering and the leaving choice.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::surviv::Sense;

#[derive(Debug, Clone)]
pub(crate) struct LpRow {
    pub coeffs: Vec<BigRational>,
    pub sense: Sense,
    pub rhs: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<BigRational>,
        objective: BigRational,
    },
    Infeasible,
    Unbounded,
}

/// `min cost·x` subject to `rows` and `lower ≤ x ≤ upper`.
pub(crate) fn solve_lp(
    cost: &[BigRational],
    rows: &[LpRow],
    lower: &[i64],
    upper: &[i64],
) -> LpOutcome {
    let n = cost.len();
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return LpOutcome::Infeasible;
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.sense == Sense::Le).count();
    let width = n + n_slack + m;
    let big = |v: i64| BigRational::from_integer(BigInt::from(v));

    let mut ub: Vec<Option<BigRational>> = (0..n).map(|j| Some(big(upper[j] - lower[j]))).collect();
    ub.extend(std::iter::repeat_n(None, n_slack + m));

    let mut t = vec![vec![BigRational::zero(); width]; m];
    let mut beta = Vec::with_capacity(m);
    let mut slack = n;
    for (i, row) in rows.iter().enumerate() {
        let mut rhs = row.rhs.clone();
        for j in 0..n {
            if !row.coeffs[j].is_zero() {
                rhs -= &row.coeffs[j] * big(lower[j]);
                t[i][j] = row.coeffs[j].clone();
            }
        }
        if row.sense == Sense::Le {
            t[i][slack] = big(1);
            slack += 1;
        }
        if rhs.is_negative() {
            for v in t[i].iter_mut() {
                *v = -v.clone();
            }
            rhs = -rhs;
        }
        t[i][n + n_slack + i] = big(1);
        beta.push(rhs);
    }
    let artificial = n + n_slack;
    let mut tab = Tableau {
        t,
        beta,
        basis: (artificial..width).collect(),
        at_upper: vec![false; width],
        ub,
        d: vec![BigRational::zero(); width],
    };

    let mut phase1 = vec![BigRational::zero(); width];
    for c in phase1.iter_mut().skip(artificial) {
        *c = big(1);
    }
    tab.price(&phase1);
    if tab.iterate().is_err() {
        unreachable!("phase one is bounded below by zero");
    }
    let infeasibility: BigRational = (0..m)
        .filter(|&i| tab.basis[i] >= artificial)
        .map(|i| tab.beta[i].clone())
        .sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }

    // drive zero-valued artificials out of the basis; rows where that is
    // impossible are redundant and simply keep their artificial at zero
    for i in 0..m {
        if tab.basis[i] < artificial {
            continue;
        }
        if let Some(j) = (0..artificial).find(|&j| !tab.is_basic(j) && !tab.t[i][j].is_zero()) {
            let v = tab.nonbasic_value(j);
            tab.pivot(i, j);
            tab.beta[i] = v;
        }
    }
    for j in artificial..width {
        tab.ub[j] = Some(BigRational::zero());
        tab.at_upper[j] = false;
    }

    let mut phase2 = cost.to_vec();
    phase2.resize(width, BigRational::zero());
    tab.price(&phase2);
    if tab.iterate().is_err() {
        return LpOutcome::Unbounded;
    }

    let x: Vec<BigRational> = (0..n).map(|j| tab.value(j) + big(lower[j])).collect();
    let objective = x.iter().zip(cost).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, objective }
}

struct Tableau {
    t: Vec<Vec<BigRational>>,
    beta: Vec<BigRational>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    ub: Vec<Option<BigRational>>,
    d: Vec<BigRational>,
}

struct Unbounded;

impl Tableau {
    fn is_basic(&self, j: usize) -> bool {
        self.basis.contains(&j)
    }

    fn nonbasic_value(&self, j: usize) -> BigRational {
        if self.at_upper[j] {
            self.ub[j].clone().expect("finite upper bound")
        } else {
            BigRational::zero()
        }
    }

    fn value(&self, j: usize) -> BigRational {
        match self.basis.iter().position(|&b| b == j) {
            Some(i) => self.beta[i].clone(),
            None => self.nonbasic_value(j),
        }
    }

    fn price(&mut self, cost: &[BigRational]) {
        for j in 0..self.d.len() {
            let mut dj = cost[j].clone();
            for (i, &b) in self.basis.iter().enumerate() {
                if !cost[b].is_zero() && !self.t[i][j].is_zero() {
                    dj -= &cost[b] * &self.t[i][j];
                }
            }
            self.d[j] = dj;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j].clone();
        for v in self.t[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = self.t[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][j].is_zero() {
                continue;
            }
            let f = self.t[i][j].clone();
            for (v, pr) in self.t[i].iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *v -= &f * pr;
                }
            }
        }
        if !self.d[j].is_zero() {
            let f = self.d[j].clone();
            for (v, pr) in self.d.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *v -= &f * pr;
                }
            }
        }
        self.basis[r] = j;
        self.at_upper[j] = false;
    }

    fn iterate(&mut self) -> Result<(), Unbounded> {
        loop {
            let entering = (0..self.d.len()).find(|&j| {
                if self.is_basic(j) {
                    return false;
                }
                if self.at_upper[j] {
                    self.d[j].is_positive()
                } else {
                    self.d[j].is_negative() && self.ub[j].as_ref().is_none_or(|u| u.is_positive())
                }
            });
            let Some(j) = entering else { return Ok(()) };
            let dir = if self.at_upper[j] { -1 } else { 1 };

            // (step, leaving variable index, row or None for a bound flip)
            let mut best: Option<(BigRational, usize, Option<usize>)> =
                self.ub[j].clone().map(|u| (u, j, None));
            for i in 0..self.t.len() {
                let a = &self.t[i][j];
                if a.is_zero() {
                    continue;
                }
                // basic variable moves by -dir·a per unit step
                let rate = if dir == 1 { -a.clone() } else { a.clone() };
                let k = self.basis[i];
                let limit = if rate.is_negative() {
                    Some(&self.beta[i] / -&rate)
                } else {
                    self.ub[k].as_ref().map(|u| (u - &self.beta[i]) / &rate)
                };
                let Some(limit) = limit else { continue };
                let better = match &best {
                    None => true,
                    Some((s, idx, _)) => limit < *s || (limit == *s && k < *idx),
                };
                if better {
                    best = Some((limit, k, Some(i)));
                }
            }
            let Some((step, _, row)) = best else {
                return Err(Unbounded);
            };

            for i in 0..self.t.len() {
                if !self.t[i][j].is_zero() {
                    let delta = &self.t[i][j] * &step;
                    if dir == 1 {
                        self.beta[i] -= delta;
                    } else {
                        self.beta[i] += delta;
                    }
                }
            }
            let entering_value = if dir == 1 {
                step.clone()
            } else {
                self.ub[j].clone().expect("at upper bound") - &step
            };
            match row {
                None => self.at_upper[j] = !self.at_upper[j],
                Some(r) => {
                    let k = self.basis[r];
                    let hit_upper = self.ub[k].as_ref().is_some_and(|u| *u == self.beta[r])
                        && !self.beta[r].is_zero();
                    self.pivot(r, j);
                    self.at_upper[k] = hit_upper;
                    self.beta[r] = entering_value;
                }
            }
        }
    }
}
