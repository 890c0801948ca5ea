//! Least squares against an exact rational normal-equations solve, plus the
//! algebraic invariants of a least-squares fit.

use num::{BigRational, ToPrimitive, Zero};
use panelconv::regression::RowKey;
use panelconv::{durbin_watson, least_squares, DesignMatrix, Error};
use proptest::prelude::*;

/// Solves `X'X b = X'y` exactly; `None` if `X'X` is singular.
fn normal_equations_exact(cols: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let q = |v: f64| BigRational::from_float(v).expect("finite");
    let k = cols.len();
    let xs: Vec<Vec<BigRational>> = cols.iter().map(|c| c.iter().map(|&v| q(v)).collect()).collect();
    let ys: Vec<BigRational> = y.iter().map(|&v| q(v)).collect();
    let dot = |a: &[BigRational], b: &[BigRational]| {
        a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
    };
    // augmented [X'X | X'y]
    let mut m: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..k).map(|j| dot(&xs[i], &xs[j])).collect();
            row.push(dot(&xs[i], &ys));
            row
        })
        .collect();
    for c in 0..k {
        let p = (c..k).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let pivot = m[c].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != c && !row[c].is_zero() {
                let f = &row[c] / &pivot[c];
                for (a, b) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *a -= &f * b;
                }
            }
        }
    }
    Some((0..k).map(|i| (&m[i][k] / &m[i][i]).to_f64().unwrap()).collect())
}

fn keys(n: usize, regions: usize) -> Vec<RowKey> {
    (0..n).map(|i| RowKey { region: format!("R{}", i % regions), year: (i / regions) as i32 }).collect()
}

fn design(cols: &[Vec<f64>], regions: usize) -> DesignMatrix {
    let mut x = DesignMatrix::new(keys(cols[0].len(), regions));
    for (j, c) in cols.iter().enumerate() {
        x.push_column(format!("x{j}"), c.clone()).unwrap();
    }
    x
}

/// Dyadic values so the rational oracle stays small.
fn value() -> impl Strategy<Value = f64> {
    (-2048i32..=2048).prop_map(|v| v as f64 / 256.0)
}

prop_compose! {
    fn problem()(n in 2usize..=50)(
        k in 1usize..=(n - 1).min(8),
        n in Just(n),
        with_intercept in any::<bool>(),
        seed in proptest::collection::vec(value(), 50 * 9),
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut cols: Vec<Vec<f64>> = (0..k).map(|j| seed[j * n..(j + 1) * n].to_vec()).collect();
        if with_intercept {
            cols[0] = vec![1.0; n];
        }
        let y = seed[8 * 50..8 * 50 + n].to_vec();
        (cols, y)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_exact_normal_equations((cols, y) in problem()) {
        let fit = least_squares(&design(&cols, 3), &y);
        match normal_equations_exact(&cols, &y) {
            None => prop_assert!(matches!(fit, Err(Error::RankDeficient { .. })), "expected rank deficiency"),
            Some(exact) => {
                let fit = match fit {
                    Ok(f) => f,
                    // numerically singular but exactly regular: nothing to compare
                    Err(Error::RankDeficient { .. }) => return Ok(()),
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                };
                let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
                for (got, want) in fit.coefficients.iter().zip(&exact) {
                    prop_assert!((got - want).abs() <= 1e-10 * scale, "{} vs {}", got, want);
                }
            }
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_columns((cols, y) in problem()) {
        let Ok(fit) = least_squares(&design(&cols, 3), &y) else { return Ok(()) };
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ny = norm(&y);
        for c in &cols {
            let ip: f64 = c.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
            prop_assert!(ip.abs() <= 1e-8 * ny * norm(c));
        }
        if cols[0].iter().all(|&v| v == 1.0) {
            prop_assert!(fit.residuals.iter().sum::<f64>().abs() <= 1e-8 * ny.max(1.0));
        }
        if let Some(r2) = fit.r_squared {
            prop_assert!(r2 <= 1.0);
        }
        prop_assert_eq!(fit.df_residual, y.len() - cols.len());
    }

    #[test]
    fn row_permutation_changes_nothing((cols, y) in problem(), rot in 0usize..50) {
        let x = design(&cols, 4);
        let Ok(fit) = least_squares(&x, &y) else { return Ok(()) };
        let n = y.len();
        let order: Vec<usize> = (0..n).map(|i| (i * 7 + rot) % n).collect();
        let mut distinct = order.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() != n {
            return Ok(());
        }
        let keys: Vec<RowKey> = order.iter().map(|&i| x.keys()[i].clone()).collect();
        let mut px = DesignMatrix::new(keys);
        for (j, c) in cols.iter().enumerate() {
            px.push_column(format!("x{j}"), order.iter().map(|&i| c[i]).collect()).unwrap();
        }
        let py: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let pfit = least_squares(&px, &py).unwrap();
        let scale = fit.coefficients.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fit.coefficients.iter().zip(&pfit.coefficients) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
        match (fit.dw, pfit.dw) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn durbin_watson_is_bounded(
        e in proptest::collection::vec(-100.0f64..100.0, 2..200),
        regions in 1usize..6,
    ) {
        if let Some(dw) = durbin_watson(&e, &keys(e.len(), regions)) {
            prop_assert!((0.0..=4.0).contains(&dw));
        }
    }
}

#[test]
fn noiseless_line_has_unit_r_squared() {
    let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.37).collect();
    let y: Vec<f64> = x.iter().map(|v| 1.5 - 0.25 * v).collect();
    let fit = least_squares(&design(&[vec![1.0; 20], x], 2), &y).unwrap();
    assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-14);
    assert!((fit.coefficients[1] + 0.25).abs() < 1e-13);
}
