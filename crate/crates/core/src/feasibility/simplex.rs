//! Phase-I simplex in exact arithmetic with Bland's rule.

use super::Rational;

/// Outcome of asking whether `A x = b, x ≥ 0` has a solution.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseOne {
    Feasible(Vec<Rational>),
    /// Farkas multipliers `y` with `yᵀA ≤ 0` componentwise and `yᵀb > 0`.
    Infeasible(Vec<Rational>),
}

/// Minimizes the sum of one artificial variable per row. `a` is row-major
/// with `b.len()` rows of equal length.
pub fn phase_one(a: &[Vec<Rational>], b: &[Rational]) -> PhaseOne {
    let m = b.len();
    let n = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|row| row.len() == n), "ragged constraint matrix");
    assert_eq!(a.len(), m, "row count mismatch");

    // Rows with negative right-hand side are negated so the artificial basis
    // starts feasible; `flip` remembers which.
    let flip: Vec<bool> = b.iter().map(Rational::is_negative).collect();
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let sign = if flip[i] { -Rational::one() } else { Rational::one() };
            let mut row = Vec::with_capacity(width);
            row.extend(a[i].iter().map(|x| &sign * x));
            row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            row.push(&sign * &b[i]);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let cost = |j: usize| if j >= n && j < n + m { Rational::one() } else { Rational::zero() };

    loop {
        // reduced-cost gain of column j: c_Bᵀ B⁻¹ A_j − c_j
        let gain = |t: &Vec<Vec<Rational>>, basis: &[usize], j: usize| -> Rational {
            let z: Rational = (0..m)
                .filter(|&r| basis[r] >= n)
                .map(|r| t[r][j].clone())
                .sum();
            z - cost(j)
        };
        let Some(enter) = (0..n + m).find(|&j| gain(&t, &basis, j).is_positive()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..m {
            if !t[r][enter].is_positive() {
                continue;
            }
            let ratio = &t[r][width - 1] * &t[r][enter].recip();
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // Phase I is bounded below by zero, so an entering column always
        // has a positive entry.
        let (pr, _) = leave.expect("phase-one objective is bounded");
        pivot(&mut t, pr, enter);
        basis[pr] = enter;
    }

    let objective: Rational = (0..m)
        .filter(|&r| basis[r] >= n)
        .map(|r| t[r][width - 1].clone())
        .sum();
    if objective.is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (r, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = t[r][width - 1].clone();
            }
        }
        PhaseOne::Feasible(x)
    } else {
        // y' = c_Bᵀ B⁻¹ read off the artificial columns; undo the row flips.
        let y = (0..m)
            .map(|i| {
                let yi: Rational = (0..m)
                    .filter(|&r| basis[r] >= n)
                    .map(|r| t[r][n + i].clone())
                    .sum();
                if flip[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        PhaseOne::Infeasible(y)
    }
}

fn pivot(t: &mut [Vec<Rational>], pr: usize, pc: usize) {
    let inv = t[pr][pc].recip();
    for x in t[pr].iter_mut() {
        *x = &*x * &inv;
    }
    let pivot_row = t[pr].clone();
    for (r, row) in t.iter_mut().enumerate() {
        if r == pr || row[pc].is_zero() {
            continue;
        }
        let factor = row[pc].clone();
        for (x, p) in row.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *x = &*x - &(&factor * p);
            }
        }
    }
}

/// Checks a Farkas certificate against the system it claims to refute.
pub fn is_farkas_certificate(a: &[Vec<Rational>], b: &[Rational], y: &[Rational]) -> bool {
    if y.len() != b.len() {
        return false;
    }
    let n = a.first().map_or(0, Vec::len);
    let columns_ok = (0..n).all(|j| {
        let v: Rational = a.iter().zip(y).map(|(row, yi)| &row[j] * yi).sum();
        !v.is_positive()
    });
    let value: Rational = b.iter().zip(y).map(|(bi, yi)| bi * yi).sum();
    columns_ok && value.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn residual_ok(a: &[Vec<Rational>], b: &[Rational], x: &[Rational]) -> bool {
        x.iter().all(|v| !v.is_negative())
            && a.iter().zip(b).all(|(row, bi)| {
                let s: Rational = row.iter().zip(x).map(|(p, q)| p * q).sum();
                &s == bi
            })
    }

    #[test]
    fn simple_feasible() {
        let a = vec![vec![r(1), r(1)], vec![r(1), r(-1)]];
        let b = vec![r(2), r(0)];
        match phase_one(&a, &b) {
            PhaseOne::Feasible(x) => assert_eq!(x, vec![r(1), r(1)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn simple_infeasible() {
        // x1 + x2 = 1 and x1 + x2 = 2
        let a = vec![vec![r(1), r(1)], vec![r(1), r(1)]];
        let b = vec![r(1), r(2)];
        match phase_one(&a, &b) {
            PhaseOne::Infeasible(y) => assert!(is_farkas_certificate(&a, &b, &y)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_needs_negative_x() {
        let a = vec![vec![r(1)]];
        let b = vec![r(-3)];
        match phase_one(&a, &b) {
            PhaseOne::Infeasible(y) => assert!(is_farkas_certificate(&a, &b, &y)),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn result_is_always_certified(
            entries in proptest::collection::vec(-3i64..=3, 12),
            rhs in proptest::collection::vec(-4i64..=4, 3),
        ) {
            let a: Vec<Vec<Rational>> = entries.chunks(4).map(|c| c.iter().map(|&v| r(v)).collect()).collect();
            let b: Vec<Rational> = rhs.iter().map(|&v| r(v)).collect();
            match phase_one(&a, &b) {
                PhaseOne::Feasible(x) => prop_assert!(residual_ok(&a, &b, &x)),
                PhaseOne::Infeasible(y) => prop_assert!(is_farkas_certificate(&a, &b, &y)),
            }
        }
    }
}
