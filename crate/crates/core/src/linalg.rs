//! Dense complex linear solves for the small Newton systems.
//!
//! The systems here are at most a few dozen unknowns and generic over the
//! scalar, so a direct elimination is used instead of a BLAS-backed solver.

use num_traits::Zero;

use crate::{Error, Real, C};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major `n × n`. Returns the solution and a crude condition
/// estimate (largest over smallest pivot modulus).
pub fn solve<T: Real>(a: &[Vec<C<T>>], b: &[C<T>]) -> crate::Result<(Vec<C<T>>, f64)> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::Incompatible("linear system shape".into()));
    }
    let mut m: Vec<Vec<C<T>>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut pmax = 0.0f64;
    let mut pmin = f64::INFINITY;
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, m[r][col].norm()))
            .fold((col, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mag = crate::f64_of(mag);
        if !(mag > 0.0) || !mag.is_finite() {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        pmax = pmax.max(mag);
        pmin = pmin.min(mag);
        m.swap(col, piv);
        rhs.swap(col, piv);
        let p = m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / p;
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[r][k] = m[r][k] - f * v;
            }
            let v = rhs[col];
            rhs[r] = rhs[r] - f * v;
        }
    }
    let mut x = vec![C::zero(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for k in r + 1..n {
            s = s - m[r][k] * x[k];
        }
        x[r] = s / m[r][r];
    }
    Ok((x, if n == 0 { 1.0 } else { pmax / pmin }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![
            vec![C::new(2.0, 0.0), C::new(1.0, 1.0)],
            vec![C::new(0.0, 1.0), C::new(3.0, 0.0)],
        ];
        let x = vec![C::new(1.0, -1.0), C::new(0.5, 2.0)];
        let b: Vec<C<f64>> = (0..2).map(|r| a[r][0] * x[0] + a[r][1] * x[1]).collect();
        let (sol, cond) = solve(&a, &b).unwrap();
        assert!((sol[0] - x[0]).norm() < 1e-14 && (sol[1] - x[1]).norm() < 1e-14);
        assert!(cond >= 1.0);
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![C::new(1.0, 0.0), C::new(2.0, 0.0)], vec![C::new(2.0, 0.0), C::new(4.0, 0.0)]];
        let b = vec![C::new(1.0, 0.0), C::new(1.0, 0.0)];
        assert!(solve(&a, &b).is_err());
    }
}
