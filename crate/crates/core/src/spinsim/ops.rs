use nalgebra::{Complex, DMatrix, DVector};

use super::SpinCluster;
use crate::{Error, Result};

pub(crate) type C64 = Complex<f64>;
pub const MAX_SPINS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[inline]
fn mz(state: usize, k: usize) -> f64 {
    if state >> k & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Dense single-spin operator `I_k^axis` on `n` spins.
pub fn spin_operator(n: usize, k: usize, axis: Axis) -> DMatrix<C64> {
    let d = 1usize << n;
    let mut m = DMatrix::zeros(d, d);
    for s in 0..d {
        match axis {
            Axis::Z => m[(s, s)] = C64::new(mz(s, k), 0.0),
            Axis::X => m[(s ^ (1 << k), s)] = C64::new(0.5, 0.0),
            // I_y |up> = (i/2)|down>, I_y |down> = (-i/2)|up>
            Axis::Y => m[(s ^ (1 << k), s)] = C64::new(0.0, if s >> k & 1 == 0 { 0.5 } else { -0.5 }),
        }
    }
    m
}

/// `sum_{k<l} b_kl (3 I_kz I_lz - I_k . I_l)`, i.e. `sqrt(6) b_kl T20^{kl}`.
pub fn dipolar_hamiltonian(cluster: &SpinCluster) -> DMatrix<f64> {
    build_hamiltonian(cluster, 0.0, 0.0).expect("cluster is valid")
}

/// `delta_omega sum I_z + omega_x sum I_x + H_dd` (real symmetric in the computational basis).
pub fn build_hamiltonian(cluster: &SpinCluster, omega_x: f64, delta_omega: f64) -> Result<DMatrix<f64>> {
    let n = cluster.n();
    if n > MAX_SPINS {
        return Err(Error::invalid(format!("n = {n} exceeds the cap of {MAX_SPINS} spins")));
    }
    let d = 1usize << n;
    let b = cluster.couplings();
    let mut h = DMatrix::zeros(d, d);
    for s in 0..d {
        let mut diag = 0.0;
        for k in 0..n {
            diag += delta_omega * mz(s, k);
            if omega_x != 0.0 {
                h[(s ^ (1 << k), s)] += 0.5 * omega_x;
            }
            for l in k + 1..n {
                let bkl = b[(k, l)];
                if bkl == 0.0 {
                    continue;
                }
                // 2 Iz Iz - (Ix Ix + Iy Iy) = 2 Iz Iz - (I+ I- + I- I+)/2
                diag += 2.0 * bkl * mz(s, k) * mz(s, l);
                if (s >> k & 1) != (s >> l & 1) {
                    h[(s ^ (1 << k) ^ (1 << l), s)] -= 0.5 * bkl;
                }
            }
        }
        h[(s, s)] += diag;
    }
    Ok(h)
}

/// Collective `(<I_x>, <I_y>, <I_z>)` of a pure state.
pub fn collective_expectations(n: usize, psi: &DVector<C64>) -> [f64; 3] {
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for s in 0..psi.len() {
        let a = psi[s];
        let p = a.norm_sqr();
        for k in 0..n {
            let up = s >> k & 1 == 0;
            z += if up { 0.5 } else { -0.5 } * p;
            // <psi| I_k |s> contributions from the flipped partner, counted once per ordered pair
            let b = psi[s ^ (1 << k)];
            let cross = b.conj() * a;
            x += 0.5 * cross.re;
            y += if up { 0.5 } else { -0.5 } * (C64::new(0.0, 1.0) * cross).re;
        }
    }
    [x, y, z]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    #[test]
    fn single_spin_offset_eigenvalues() {
        let c = SpinCluster::from_couplings(DMatrix::zeros(1, 1)).unwrap();
        let h = build_hamiltonian(&c, 0.0, 3.0).unwrap();
        let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert_eq!(e, vec![-1.5, 1.5]);
    }

    #[test]
    fn pair_spectrum_matches_analytic() {
        let b = 2.0;
        let c = SpinCluster::from_couplings(DMatrix::from_row_slice(2, 2, &[0.0, b, b, 0.0])).unwrap();
        let mut e: Vec<f64> = SymmetricEigen::new(dipolar_hamiltonian(&c)).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        // triplet m=+-1: b/2, triplet m=0: -b, singlet: 0
        let mut expect = vec![b / 2.0, b / 2.0, -b, 0.0];
        expect.sort_by(f64::total_cmp);
        for (x, y) in e.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_matches_operator_algebra() {
        let c = SpinCluster::from_couplings(DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -2.0, 1.0, 0.0, 0.5, -2.0, 0.5, 0.0])).unwrap();
        let h = build_hamiltonian(&c, 0.7, -0.3).unwrap().map(|x| C64::new(x, 0.0));
        let op = |k, a| spin_operator(3, k, a);
        let mut expect = DMatrix::<C64>::zeros(8, 8);
        for k in 0..3 {
            expect += op(k, Axis::Z) * C64::new(-0.3, 0.0) + op(k, Axis::X) * C64::new(0.7, 0.0);
            for l in k + 1..3 {
                let b = C64::new(c.couplings()[(k, l)], 0.0);
                let dot = op(k, Axis::X) * op(l, Axis::X) + op(k, Axis::Y) * op(l, Axis::Y) + op(k, Axis::Z) * op(l, Axis::Z);
                expect += (op(k, Axis::Z) * op(l, Axis::Z) * C64::new(3.0, 0.0) - dot) * b;
            }
        }
        assert!((h - expect).norm() < 1e-12);
    }

    #[test]
    fn expectations_match_dense_operators() {
        let n = 3;
        let psi = DVector::from_fn(8, |i, _| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.1).cos()));
        let psi = &psi / C64::new(psi.norm(), 0.0);
        let e = collective_expectations(n, &psi);
        for (a, ax) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
            let mut tot = DMatrix::<C64>::zeros(8, 8);
            for k in 0..n {
                tot += spin_operator(n, k, ax);
            }
            let v = (psi.adjoint() * tot * &psi)[(0, 0)].re;
            assert!((v - e[a]).abs() < 1e-12, "{ax:?}");
        }
    }
}
