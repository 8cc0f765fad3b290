//! Jacobi-preconditioned conjugate gradient for symmetric positive definite
//! systems given as a matrix-vector product.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖b − Ax‖` at exit.
    pub residual: f64,
    /// `½xᵀAx − bᵀx` at the starting point and after every iteration, when
    /// requested.
    pub energy_trace: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug)]
pub struct CgSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub trace_energy: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Energy from the residual: with `Ax = b − r`, `½xᵀAx − bᵀx = −½xᵀ(b + r)`.
fn energy(x: &[f64], b: &[f64], r: &[f64]) -> f64 {
    -0.5 * x.iter().zip(b).zip(r).map(|((x, b), r)| x * (b + r)).sum::<f64>()
}

/// Solves `A x = b` starting from `x0`. `apply(v, out)` must write `A v`
/// into `out`; `diagonal` is the diagonal of `A` (all entries positive).
/// Iterates until the Euclidean norm of the residual is at most
/// `settings.tolerance`.
pub fn solve(
    apply: impl Fn(&[f64], &mut [f64]),
    diagonal: &[f64],
    b: &[f64],
    x0: Vec<f64>,
    settings: CgSettings,
) -> Result<CgOutcome> {
    let n = b.len();
    assert_eq!(diagonal.len(), n);
    assert_eq!(x0.len(), n);

    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            solution: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            energy_trace: settings.trace_energy.then(|| vec![0.0]),
        });
    }

    let inv_diag: Vec<f64> = diagonal.iter().map(|&d| 1.0 / d).collect();
    let mut x = x0;
    let mut r = vec![0.0; n];
    apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = dot(&r, &r).sqrt();
    let mut trace = settings.trace_energy.then(|| vec![energy(&x, b, &r)]);

    let mut iterations = 0;
    while residual > settings.tolerance && iterations < settings.max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rz = rz_next;
        residual = dot(&r, &r).sqrt();
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(energy(&x, b, &r));
        }
    }

    if residual > settings.tolerance {
        return Err(Error::NonConvergence { residual, iterations });
    }
    Ok(CgOutcome {
        solution: x,
        iterations,
        residual,
        energy_trace: trace,
    })
}
