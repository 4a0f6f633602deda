//! Small dense complex linear-algebra helpers shared by the simulator.
//!
//! States are plain `Vec<Complex64>`; operators are `nalgebra::DMatrix`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type StateVector = Vec<C64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    norm_sqr(v).sqrt()
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalized(v: &[C64]) -> Option<StateVector> {
    let n = norm(v);
    if n < 1e-300 {
        return None;
    }
    Some(v.iter().map(|a| a / n).collect())
}

/// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`; zero if either vector vanishes.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    let na = norm_sqr(a);
    let nb = norm_sqr(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    inner(a, b).norm_sqr() / (na * nb)
}

pub fn basis_state(dim: usize, index: usize) -> StateVector {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}

pub fn scaled(v: &[C64], s: C64) -> StateVector {
    v.iter().map(|a| a * s).collect()
}

pub fn add_assign(acc: &mut [C64], v: &[C64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

pub fn sub(a: &[C64], b: &[C64]) -> StateVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    norm(&sub(a, b))
}

/// Haar-random unit vector (normalized complex Gaussian).
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let v: StateVector = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix on `R`'s diagonal.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with spectrum in `[0, 1]`.
pub fn random_contraction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(dim, rng);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |_, _| {
        C64::new(rng.random::<f64>(), 0.0)
    }));
    &u * diag * u.adjoint()
}

pub fn apply_matrix(m: &CMatrix, v: &[C64]) -> StateVector {
    let n = m.nrows();
    let mut out = vec![ZERO; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        for (j, x) in v.iter().enumerate() {
            acc += m[(i, j)] * x;
        }
        *o = acc;
    }
    out
}

/// `⟨v|M|v⟩`, real part (exact for Hermitian `M`).
pub fn quadratic_form(m: &CMatrix, v: &[C64]) -> f64 {
    inner(v, &apply_matrix(m, v)).re
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

/// Maximum entrywise deviation of `M†M` from the identity.
pub fn unitarity_error(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let mut err = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { ONE } else { ZERO };
            err = err.max((prod[(i, j)] - target).norm());
        }
    }
    err
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut err = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..6 {
            assert!(unitarity_error(&random_unitary(dim, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn contraction_spectrum_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_contraction(5, &mut rng);
        assert!(hermiticity_error(&m) < 1e-12);
        let eig = m.symmetric_eigen();
        for l in eig.eigenvalues.iter() {
            assert!(*l > -1e-12 && *l < 1.0 + 1e-12);
        }
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let a = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let b = scaled(&a, C64::new(0.0, 2.0));
        assert!((fidelity(&a, &b) - 1.0).abs() < 1e-15);
    }
}
