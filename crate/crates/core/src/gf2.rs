//! Arithmetic in GF(2^n) for n ≤ 8 and small GF(2) linear algebra.
//!
//! Field elements are integers whose bit `i` is the coefficient of `α^i`.

use crate::error::{Error, Result};

/// Irreducible polynomials, indexed by degree.
const POLYS: [u32; 9] = [0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10000011, 0b100011011];

pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gf2n {
    n: usize,
    poly: u32,
}

impl Gf2n {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DEGREE {
            return Err(Error::Parameter(format!("field degree must be in 1..={MAX_DEGREE}")));
        }
        Ok(Self { n, poly: POLYS[n] })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u64 {
        1 << self.n
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let (mut a, mut b) = (a as u32, b as u32);
        let top = 1u32 << self.n;
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.poly;
            }
        }
        u64::from(acc)
    }

    pub fn pow_alpha(&self, e: usize) -> u64 {
        (0..e).fold(1, |x, _| self.mul(x, 0b10))
    }

    /// Matrix of `x ↦ c·x`; entry `m[r]` is row `r` as a bitmask over columns.
    pub fn mul_matrix(&self, c: u64) -> Vec<u64> {
        let cols: Vec<u64> = (0..self.n).map(|j| self.mul(c, 1 << j)).collect();
        (0..self.n)
            .map(|r| {
                cols.iter()
                    .enumerate()
                    .fold(0, |row, (j, &col)| row | (((col >> r) & 1) << j))
            })
            .collect()
    }
}

/// `M·x` over GF(2) for a row-bitmask matrix.
pub fn mat_vec(m: &[u64], x: u64) -> u64 {
    m.iter()
        .enumerate()
        .fold(0, |acc, (r, &row)| acc | (u64::from((row & x).count_ones() & 1) << r))
}

pub fn rank(m: &[u64]) -> usize {
    let mut rows = m.to_vec();
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i] >> bit & 1 == 1 {
                rows[i] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_nonzero_element_is_invertible() {
        for n in 1..=MAX_DEGREE {
            let f = Gf2n::new(n).unwrap();
            for a in 1..f.order() {
                assert!((1..f.order()).any(|b| f.mul(a, b) == 1), "n={n} a={a}");
            }
        }
    }

    #[test]
    fn known_products() {
        let f = Gf2n::new(8).unwrap();
        assert_eq!(f.mul(0x53, 0xCA), 0x01);
        let f = Gf2n::new(3).unwrap();
        assert_eq!(f.mul(0b100, 0b010), 0b011);
    }

    #[test]
    fn matrix_agrees_with_multiplication() {
        let f = Gf2n::new(5).unwrap();
        for c in 0..32 {
            let m = f.mul_matrix(c);
            for x in 0..32 {
                assert_eq!(mat_vec(&m, x), f.mul(c, x));
            }
            assert_eq!(rank(&m), if c == 0 { 0 } else { 5 });
        }
    }

    #[test]
    fn alpha_powers() {
        let f = Gf2n::new(4).unwrap();
        assert_eq!(f.pow_alpha(0), 1);
        assert_eq!(f.pow_alpha(3), 0b1000);
        assert_eq!(f.pow_alpha(4), 0b0011);
        assert_eq!(f.pow_alpha(15), 1);
        assert_eq!(Gf2n::new(1).unwrap().pow_alpha(3), 1);
    }
}
