//! Random linear maps `F_p^{m+u} → F_p^m` and the dimension of their cokernel.
//!
//! `simulate` splits its samples into fixed-size chunks; chunk `i` draws from
//! a ChaCha8 stream seeded with `seed` and stream number `i`. The counts are
//! summed, so the report does not depend on how many workers ran the chunks.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::is_odd_prime;
use crate::heuristics::{alpha, DistributionTable, DEFAULT_TOL};

/// Samples per PRNG stream.
pub const CHUNK: u64 = 4096;

/// An `rows × cols` matrix over `F_p`, row-major, entries in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixModP {
    p: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl MatrixModP {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        MatrixModP {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    /// Builds a matrix from rows, reducing every entry mod `p`.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        if !is_odd_prime(p as u64) {
            return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
        }
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        let entries = rows.iter().flatten().map(|&x| x.rem_euclid(p as i64) as u32).collect();
        Ok(MatrixModP {
            p,
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn random<R: Rng + ?Sized>(p: u32, rows: usize, cols: usize, rng: &mut R) -> Self {
        let entries = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        MatrixModP { p, rows, cols, entries }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.entries[i * self.cols + j] = v % self.p;
    }

    /// Rank over `F_p` by Gaussian elimination with modular inverses.
    pub fn rank(&self) -> usize {
        let p = self.p as u64;
        let mut a: Vec<u64> = self.entries.iter().map(|&x| x as u64).collect();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(piv) = (rank..rows).find(|&r| a[r * cols + c] != 0) else {
                continue;
            };
            if piv != rank {
                for j in 0..cols {
                    a.swap(piv * cols + j, rank * cols + j);
                }
            }
            let inv = inv_mod(a[rank * cols + c], p);
            for j in c..cols {
                a[rank * cols + j] = a[rank * cols + j] * inv % p;
            }
            for r in (rank + 1)..rows {
                let f = a[r * cols + c];
                if f == 0 {
                    continue;
                }
                for j in c..cols {
                    let sub = f * a[rank * cols + j] % p;
                    a[r * cols + j] = (a[r * cols + j] + p - sub) % p;
                }
            }
            rank += 1;
        }
        rank
    }
}

fn inv_mod(x: u64, p: u64) -> u64 {
    crate::exactmath::pow_mod(x as i64, p - 2, p)
}

/// `dim coker(M) = rows − rank(M)`.
pub fn cokernel_dim(m: &MatrixModP) -> usize {
    m.rows - m.rank()
}

/// Bit-sliced matrix over `F_3`. Row `r` occupies `2·words` consecutive
/// words: first the plane marking entries equal to 1, then the plane marking
/// entries equal to 2, each covering the columns 64 at a time.
struct F3Matrix {
    rows: usize,
    words: usize,
    data: Vec<u64>,
}

#[inline(always)]
fn f3_add(x1: u64, x2: u64, y1: u64, y2: u64) -> (u64, u64) {
    let xz = !(x1 | x2);
    let yz = !(y1 | y2);
    ((x1 & yz) | (xz & y1) | (x2 & y2), (x2 & yz) | (xz & y2) | (x1 & y1))
}

impl F3Matrix {
    fn random<R: RngCore>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let words = cols.div_ceil(64).max(1);
        let tail_mask = if cols.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (cols % 64)) - 1
        };
        let mut data = vec![0u64; rows * words * 2];
        for row in data.chunks_exact_mut(2 * words) {
            let (ones, twos) = row.split_at_mut(words);
            for w in 0..words {
                // Lane-wise rejection of the pattern (1, 1).
                let (mut a, mut b) = (rng.next_u64(), rng.next_u64());
                let mut bad = a & b;
                while bad != 0 {
                    let (a2, b2) = (rng.next_u64(), rng.next_u64());
                    a = (a & !bad) | (a2 & bad);
                    b = (b & !bad) | (b2 & bad);
                    bad = a & b;
                }
                let mask = if w + 1 == words { tail_mask } else { u64::MAX };
                ones[w] = a & mask;
                twos[w] = b & mask;
            }
        }
        F3Matrix { rows, words, data }
    }

    #[cfg(test)]
    fn entry(&self, r: usize, c: usize) -> u8 {
        let base = r * 2 * self.words + c / 64;
        let b = c % 64;
        ((self.data[base] >> b) & 1) as u8 | ((((self.data[base + self.words] >> b) & 1) as u8) << 1)
    }

    fn rank(&mut self, cols: usize) -> usize {
        match self.words {
            1 => self.rank_fixed::<1, 2>(cols),
            2 => self.rank_fixed::<2, 4>(cols),
            3 => self.rank_fixed::<3, 6>(cols),
            4 => self.rank_fixed::<4, 8>(cols),
            _ => self.rank_any(cols),
        }
    }

    /// Elimination with `W = words` and row stride `S = 2W` fixed at compile
    /// time. Rows at or below the current rank vanish in all columns before
    /// the pivot column, so updates start at the pivot's word.
    fn rank_fixed<const W: usize, const S: usize>(&mut self, cols: usize) -> usize {
        let rows = self.rows;
        let (mat, rest) = self.data.as_chunks_mut::<S>();
        debug_assert!(rest.is_empty());
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let w = c / 64;
            let shift = c % 64;
            let bit = 1u64 << shift;
            let Some(piv) = (rank..rows).find(|&r| (mat[r][w] | mat[r][W + w]) & bit != 0) else {
                continue;
            };
            mat.swap(piv, rank);
            let mut prow = mat[rank];
            if prow[W + w] & bit != 0 {
                // Scale the pivot row by 2 so the pivot is 1.
                let (ones, twos) = prow.split_at_mut(W);
                ones.swap_with_slice(twos);
                mat[rank] = prow;
            }
            for row in mat[rank + 1..].iter_mut() {
                // Entry 1 adds 2·pivot row, entry 2 adds the pivot row, 0 adds nothing.
                let sel1 = 0u64.wrapping_sub((row[w] >> shift) & 1);
                let sel2 = 0u64.wrapping_sub((row[W + w] >> shift) & 1);
                for k in w..W {
                    let y1 = (prow[k] & sel2) | (prow[W + k] & sel1);
                    let y2 = (prow[W + k] & sel2) | (prow[k] & sel1);
                    let (r1, r2) = f3_add(row[k], row[W + k], y1, y2);
                    row[k] = r1;
                    row[W + k] = r2;
                }
            }
            rank += 1;
        }
        rank
    }

    fn rank_any(&mut self, cols: usize) -> usize {
        let words = self.words;
        let stride = 2 * words;
        let mut rank = 0;
        for c in 0..cols {
            if rank == self.rows {
                break;
            }
            let w = c / 64;
            let bit = 1u64 << (c % 64);
            let Some(piv) = (rank..self.rows).find(|&r| {
                let base = r * stride;
                (self.data[base + w] | self.data[base + words + w]) & bit != 0
            }) else {
                continue;
            };
            if piv != rank {
                let (lo, hi) = self.data.split_at_mut(piv * stride);
                lo[rank * stride..(rank + 1) * stride].swap_with_slice(&mut hi[..stride]);
            }
            let (head, tail) = self.data.split_at_mut((rank + 1) * stride);
            let prow = &mut head[rank * stride..];
            if prow[words + w] & bit != 0 {
                let (ones, twos) = prow.split_at_mut(words);
                ones.swap_with_slice(twos);
            }
            let prow = &*prow;
            for row in tail.chunks_exact_mut(stride) {
                let e1 = row[w] & bit != 0;
                let e2 = row[words + w] & bit != 0;
                if !(e1 || e2) {
                    continue;
                }
                for k in w..words {
                    let (y1, y2) = if e1 {
                        (prow[words + k], prow[k])
                    } else {
                        (prow[k], prow[words + k])
                    };
                    let (r1, r2) = f3_add(row[k], row[words + k], y1, y2);
                    row[k] = r1;
                    row[words + k] = r2;
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Result of a cokernel simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub p: u64,
    pub u: u32,
    pub m: u32,
    pub samples: u64,
    pub seed: Option<u64>,
    pub exhaustive: bool,
    /// `counts[r]` = number of sampled maps with cokernel dimension `r`.
    pub counts: Vec<u64>,
    pub empirical: DistributionTable,
    pub reference: DistributionTable,
    pub max_abs_deviation: f64,
}

impl SimulationReport {
    fn build(p: u64, u: u32, m: u32, seed: Option<u64>, exhaustive: bool, counts: Vec<u64>) -> Result<Self> {
        let samples: u64 = counts.iter().sum();
        let empirical = DistributionTable::from_fn(m, |r| counts[r as usize] as f64 / samples as f64);
        let mut reference = DistributionTable::from_fn(m, |_| 0.0);
        for r in 0..=m {
            reference.entries.insert(r, alpha(p, u, r, DEFAULT_TOL)?.value);
        }
        let max_abs_deviation = empirical.max_abs_deviation(&reference);
        Ok(SimulationReport {
            p,
            u,
            m,
            samples,
            seed,
            exhaustive,
            counts,
            empirical,
            reference,
            max_abs_deviation,
        })
    }

    /// Binomial standard error of the empirical `Prob(dim = r)` under the reference.
    pub fn standard_error(&self, r: u32) -> f64 {
        let q = self.reference.get(r);
        (q * (1.0 - q) / self.samples as f64).sqrt()
    }
}

fn check_args(p: u64, m: u32) -> Result<()> {
    if !is_odd_prime(p) || p > u32::MAX as u64 {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    Ok(())
}

fn chunk_counts(p: u64, u: u32, m: u32, seed: u64, chunk: u64, n: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let (rows, cols) = (m as usize, (m + u) as usize);
    let mut counts = vec![0u64; rows + 1];
    for _ in 0..n {
        let dim = if p == 3 {
            let mut a = F3Matrix::random(rows, cols, &mut rng);
            rows - a.rank(cols)
        } else {
            cokernel_dim(&MatrixModP::random(p as u32, rows, cols, &mut rng))
        };
        counts[dim] += 1;
    }
    counts
}

/// Monte-Carlo estimate of the cokernel-dimension distribution of a uniform
/// `m × (m+u)` matrix over `F_p`, run on `threads` workers.
pub fn simulate(p: u64, u: u32, m: u32, samples: u64, seed: u64, threads: usize) -> Result<SimulationReport> {
    check_args(p, m)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let work = |i: u64| {
        let n = CHUNK.min(samples - i * CHUNK);
        chunk_counts(p, u, m, seed, i, n)
    };
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    let zero = || vec![0u64; m as usize + 1];
    let counts = if threads <= 1 {
        (0..chunks).map(work).fold(zero(), merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(work).reduce(zero, merge))
    };
    SimulationReport::build(p, u, m, Some(seed), false, counts)
}

/// Same report as [`simulate`], with the random draws replaced by every one
/// of the `p^{m(m+u)}` matrices.
pub fn enumerate_exhaustive(p: u64, u: u32, m: u32) -> Result<SimulationReport> {
    check_args(p, m)?;
    let (rows, cols) = (m as usize, (m + u) as usize);
    let cells = rows * cols;
    let total = (p as f64).powi(cells as i32);
    if total > 5e7 {
        return Err(Error::Resource(format!(
            "exhaustive enumeration of {p}^{cells} matrices is too large"
        )));
    }
    let mut mat = MatrixModP::zeros(p as u32, rows, cols);
    let mut counts = vec![0u64; rows + 1];
    loop {
        counts[cokernel_dim(&mat)] += 1;
        // Odometer increment over all entries.
        let mut i = 0;
        loop {
            if i == cells {
                return SimulationReport::build(p, u, m, None, true, counts);
            }
            let v = mat.entries[i] + 1;
            if v == p as u32 {
                mat.entries[i] = 0;
                i += 1;
            } else {
                mat.entries[i] = v;
                break;
            }
        }
    }
}
