//! Deterministic pseudo-random generators used by the test suites. Seeded
//! explicitly so every run reproduces the same cases byte for byte.

use alloc::vec::Vec;

use num_rational::BigRational;

use crate::field::ValuedField;
use crate::latnorm::{AdaptedNorm, Lattice};
use crate::matrix::{self, Matrix};

/// SplitMix64.
#[derive(Clone, Debug)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.wrapping_add(0x9E3779B97F4A7C15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo < hi);
        let span = (hi - lo) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[(self.next_u64() % items.len() as u64) as usize]
    }
}

/// Element of the valuation ring: a short uniformizer-power expansion with
/// small integer digits.
pub fn rand_o_elem<F: ValuedField>(f: &F, rng: &mut Rng) -> F::Elem {
    let mut acc = f.zero();
    for j in 0..3 {
        let digit = f.from_i64(rng.range(-4, 5));
        acc = f.add(&acc, &f.mul(&digit, &f.uniformizer_pow(j)));
    }
    acc
}

/// Arbitrary field element with valuation bounded below by -3.
pub fn rand_elem<F: ValuedField>(f: &F, rng: &mut Rng) -> F::Elem {
    let shift = rng.range(-3, 4);
    f.mul(&rand_o_elem(f, rng), &f.uniformizer_pow(shift))
}

pub fn rand_vector<F: ValuedField>(f: &F, n: usize, rng: &mut Rng) -> Vec<F::Elem> {
    (0..n).map(|_| rand_elem(f, rng)).collect()
}

/// Random element of GL over the valuation ring: a product of elementary
/// operations applied to the identity.
pub fn rand_gl_o<F: ValuedField>(f: &F, n: usize, rng: &mut Rng) -> Matrix<F::Elem> {
    let mut m = matrix::identity(f, n);
    for _ in 0..(3 * n) {
        match rng.range(0, 3) {
            0 => {
                let a = rng.range(0, n as i64) as usize;
                let b = rng.range(0, n as i64) as usize;
                m.swap_cols(a, b);
            }
            1 => {
                let a = rng.range(0, n as i64) as usize;
                // unit of the form 1 + pi * small
                let u = f.add(
                    &f.one(),
                    &f.mul(&f.from_i64(rng.range(-2, 3)), &f.uniformizer_pow(1)),
                );
                matrix::scale_col(f, &mut m, a, &u);
            }
            _ => {
                let a = rng.range(0, n as i64) as usize;
                let b = rng.range(0, n as i64) as usize;
                if a != b {
                    let c = rand_o_elem(f, rng);
                    matrix::add_col_multiple(f, &mut m, a, b, &c);
                }
            }
        }
    }
    m
}

/// Random invertible matrix over the field: a matrix invertible over the
/// valuation ring with uniformizer powers mixed into the columns, so no
/// rejection sampling is needed.
pub fn rand_invertible<F: ValuedField>(f: &F, n: usize, rng: &mut Rng) -> Matrix<F::Elem> {
    let mut m = rand_gl_o(f, n, rng);
    for j in 0..n {
        let k = rng.range(-2, 3);
        if k != 0 {
            matrix::scale_col(f, &mut m, j, &f.uniformizer_pow(k));
        }
    }
    m
}

pub fn rand_lattice<F: ValuedField>(f: &F, n: usize, rng: &mut Rng) -> Lattice<F> {
    let u = rand_gl_o(f, n, rng);
    let exps: Vec<i64> = (0..n).map(|_| rng.range(-3, 4)).collect();
    let w = rand_gl_o(f, n, rng);
    let mut gens = matrix::mul(f, &u, &w);
    for (j, &e) in exps.iter().enumerate() {
        matrix::scale_col(f, &mut gens, j, &f.uniformizer_pow(e));
    }
    Lattice::hnf(f, &gens).expect("product of invertibles is invertible")
}

pub fn rand_rational(rng: &mut Rng, max_den: i64) -> BigRational {
    let den = rng.range(1, max_den + 1);
    let num = rng.range(-3 * den, 3 * den + 1);
    BigRational::new(num.into(), den.into())
}

pub fn rand_norm<F: ValuedField>(f: &F, n: usize, rng: &mut Rng) -> AdaptedNorm<F> {
    let basis = rand_invertible(f, n, rng);
    let values = (0..n).map(|_| rand_rational(rng, 4)).collect();
    AdaptedNorm::new(f, basis, values).expect("basis is invertible")
}

pub fn rand_integral_norm<F: ValuedField>(f: &F, n: usize, rng: &mut Rng) -> AdaptedNorm<F> {
    let basis = rand_invertible(f, n, rng);
    let values = (0..n)
        .map(|_| BigRational::from(num_bigint::BigInt::from(rng.range(-3, 4))))
        .collect();
    AdaptedNorm::new(f, basis, values).expect("basis is invertible")
}
