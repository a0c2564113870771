//! Derivative-free local maximization.

use super::GammaError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once every vertex lies within this distance of the best one.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { tolerance: 1e-7, max_iter: 2000, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes `objective` from `x0` with the standard reflection (1),
/// expansion (2), contraction (1/2) and shrink (1/2) coefficients.
pub fn nelder_mead_max<F>(mut objective: F, x0: &[f64], opts: NelderMeadOptions) -> Result<NelderMeadResult, GammaError>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GammaError::NonFinite(x.to_vec()))
        }
    };
    let f0 = eval(x0)?;
    if n == 0 {
        return Ok(NelderMeadResult { x: Vec::new(), f: f0, iterations: 0, converged: true });
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let f = eval(&x)?;
        simplex.push((x, f));
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut centroid = vec![0.0; n];
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    while iterations < opts.max_iter {
        // best first; the sort is stable so ties keep their order
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if diameter < opts.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;
        let xr = lerp(&centroid, &worst, -1.0);
        let fr = eval(&xr)?;
        if fr > f_best {
            let xe = lerp(&centroid, &worst, -2.0);
            let fe = eval(&xe)?;
            simplex[n] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr > f_worst {
            let xc = lerp(&centroid, &xr, 0.5);
            let fc = eval(&xc)?;
            let ok = fc >= fr;
            (xc, fc, ok)
        } else {
            let xc = lerp(&centroid, &worst, 0.5);
            let fc = eval(&xc)?;
            let ok = fc > f_worst;
            (xc, fc, ok)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = lerp(&best, &vertex.0, 0.5);
            let f = eval(&x)?;
            *vertex = (x, f);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (x, f) = simplex.swap_remove(0);
    Ok(NelderMeadResult { x, f, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn concave_quadratic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x0: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let r = nelder_mead_max(|x| -x.iter().map(|v| v * v).sum::<f64>(), &x0, Default::default()).unwrap();
            assert!(r.f > -1e-6 && r.f <= 0.0);
            assert!(r.converged);
        }
    }

    #[test]
    fn cosine_from_near_zero() {
        let r = nelder_mead_max(|x| x[0].cos(), &[0.1], Default::default()).unwrap();
        assert!((r.f - 1.0).abs() < 1e-12);
        assert!(r.x[0].abs() < 1e-6);
        assert!(r.f >= 0.1f64.cos());
    }

    #[test]
    fn deterministic_trajectory() {
        let f = |x: &[f64]| (x[0] * 1.3).sin() * (x[1] - 0.2).cos() - 0.01 * x[2] * x[2];
        let a = nelder_mead_max(f, &[0.3, 1.0, -2.0], Default::default()).unwrap();
        let b = nelder_mead_max(f, &[0.3, 1.0, -2.0], Default::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_non_finite_values() {
        let r = nelder_mead_max(|x| if x[0] > 0.2 { f64::NAN } else { x[0] }, &[0.0], Default::default());
        assert!(matches!(r, Err(GammaError::NonFinite(_))));
    }
}
