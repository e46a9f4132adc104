//! Continuous path functionals: since weak convergence holds in C([0,T]),
//! convergence of each continuous functional's law is a necessary
//! consequence; the harness tests a battery of them.

use crate::scalar::Scalar;
use crate::sim::PathSample;
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct PathFunctionals<F> {
    /// Z(T)
    pub terminal: Vec<F>,
    /// sup_t |Z(t)|
    pub sup_norm: F,
    /// l(T)
    pub local_time: F,
    /// Modulus of continuity omega(Z, [0,T], delta).
    pub modulus: F,
    pub stopped: bool,
}

/// Evaluate the functional battery with the given modulus window.
pub fn path_functionals_with<F: Scalar>(path: &PathSample<F>, delta: F) -> PathFunctionals<F> {
    let n = path.n_steps();
    let d = path.dim;
    let mut sup_norm = F::zero();
    for k in 0..=n {
        let s = path.state(k);
        let norm = s.iter().map(|&v| v * v).sum::<F>().sqrt();
        sup_norm = sup_norm.max(norm);
    }
    let window = (delta / path.dt).to_f64_c().floor() as usize;
    let mut modulus = F::zero();
    if window > 0 {
        for k in 0..n {
            let zk = path.state(k);
            let jmax = (k + window).min(n);
            for j in (k + 1)..=jmax {
                let zj = path.state(j);
                let mut acc = F::zero();
                for i in 0..d {
                    let dv = zj[i] - zk[i];
                    acc = acc + dv * dv;
                }
                modulus = modulus.max(acc.sqrt());
            }
        }
    }
    PathFunctionals {
        terminal: path.terminal().to_vec(),
        sup_norm,
        local_time: path.total_local_time(),
        modulus,
        stopped: path.is_stopped(),
    }
}

/// The battery at the default modulus window delta = 0.01.
pub fn path_functionals<F: Scalar>(path: &PathSample<F>) -> PathFunctionals<F> {
    path_functionals_with(path, F::from_f64_c(tol::MODULUS_DELTA))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_path(z: Vec<f64>, n: usize) -> PathSample<f64> {
        let d = z.len();
        let mut states = Vec::new();
        for _ in 0..=n {
            states.extend_from_slice(&z);
        }
        PathSample {
            path_id: 0,
            rng_seed: 0,
            dim: d,
            dt: 0.01,
            states,
            local_time: vec![0.0; n + 1],
            reflection: vec![0.0; (n + 1) * d],
            face_local_time: None,
            tau_v: None,
        }
    }

    #[test]
    fn constant_path_functionals() {
        let f = path_functionals(&constant_path(vec![3.0, 4.0], 50));
        assert_eq!(f.terminal, vec![3.0, 4.0]);
        assert_eq!(f.sup_norm, 5.0);
        assert_eq!(f.local_time, 0.0);
        assert_eq!(f.modulus, 0.0);
        assert!(!f.stopped);
    }

    #[test]
    fn linear_path_modulus() {
        // Z(t) = t e1 on [0,1] at dt = 0.01: omega(delta = 0.1) = 0.1.
        let n = 100;
        let mut states = Vec::new();
        for k in 0..=n {
            states.push(k as f64 * 0.01);
        }
        let p = PathSample {
            path_id: 0,
            rng_seed: 0,
            dim: 1,
            dt: 0.01,
            states,
            local_time: vec![0.0; n + 1],
            reflection: vec![0.0; n + 1],
            face_local_time: None,
            tau_v: None,
        };
        let f = path_functionals_with(&p, 0.1);
        assert!((f.modulus - 0.1).abs() < 1e-12);
        assert!((f.sup_norm - 1.0).abs() < 1e-12);
    }
}
