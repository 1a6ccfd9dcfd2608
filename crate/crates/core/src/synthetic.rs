//! Generators for synthetic Hamiltonians: random molecular-like integrals,
//! planted low-rank tensors and lattice models.

use nalgebra::DMatrix;
use rand::Rng;

use crate::fcidump::FciDump;

fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

/// Random integrals with a positive semidefinite two-electron tensor
/// `(ij|kl) = sum_m g_m[i,j] g_m[k,l]` and a diagonally dominant one-electron part.
///
/// Panics if the electron counts are invalid for `norb`.
pub fn random_fcidump<R: Rng + ?Sized>(
    norb: usize,
    nelec: usize,
    ms2: i64,
    rng: &mut R,
) -> FciDump {
    let mut dump = FciDump::new(norb, nelec, ms2).expect("valid sizes");
    let h1 = random_symmetric(norb, rng);
    for i in 0..norb {
        for j in 0..=i {
            let diag_shift = if i == j { -2.0 + 0.5 * i as f64 } else { 0.0 };
            dump.set_h1(i, j, 0.3 * h1[(i, j)] + diag_shift).unwrap();
        }
    }
    let n_factors = norb + 1;
    let factors: Vec<DMatrix<f64>> = (0..n_factors)
        .map(|_| random_symmetric(norb, rng) * 0.4)
        .collect();
    let entries: Vec<_> = dump
        .h2_canonical()
        .map(|(i, j, k, l, _)| (i, j, k, l))
        .collect();
    for (i, j, k, l) in entries {
        let v: f64 = factors.iter().map(|g| g[(i, j)] * g[(k, l)]).sum();
        dump.set_h2(i, j, k, l, v).unwrap();
    }
    dump.set_e_core(rng.gen_range(-2.0..2.0));
    dump
}

/// `(ij|kl) = scale^2 g[i,j] g[k,l]` for a random symmetric unit-norm `g`.
/// Returns the Hamiltonian and `g`.
pub fn rank_one_fcidump<R: Rng + ?Sized>(
    norb: usize,
    scale: f64,
    rng: &mut R,
) -> (FciDump, DMatrix<f64>) {
    let g = random_symmetric(norb, rng);
    let g = &g / g.norm();
    let mut dump = FciDump::new(norb, norb.min(2), 0).expect("valid sizes");
    let entries: Vec<_> = dump
        .h2_canonical()
        .map(|(i, j, k, l, _)| (i, j, k, l))
        .collect();
    for (i, j, k, l) in entries {
        dump.set_h2(i, j, k, l, scale * scale * g[(i, j)] * g[(k, l)])
            .unwrap();
    }
    (dump, g)
}

/// One-dimensional Fermi-Hubbard chain with hopping `t` and on-site `u`.
pub fn hubbard_chain(
    norb: usize,
    nelec: usize,
    ms2: i64,
    t: f64,
    u: f64,
    periodic: bool,
) -> FciDump {
    let mut dump = FciDump::new(norb, nelec, ms2).expect("valid sizes");
    for i in 0..norb.saturating_sub(1) {
        dump.set_h1(i, i + 1, -t).unwrap();
    }
    if periodic && norb > 2 {
        dump.set_h1(0, norb - 1, -t).unwrap();
    }
    for i in 0..norb {
        dump.set_h2(i, i, i, i, u).unwrap();
    }
    dump
}
