//! Corrugation numbers N_{k,i} and the arithmetic derived from them.

use crate::error::{Error, Result};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Corrugation numbers, one row (N_{k,1}, N_{k,2}, N_{k,3}) per k = 1, 2, ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    rows: Vec<[u64; 3]>,
}

impl Schedule {
    pub fn new(rows: Vec<[u64; 3]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("schedule needs at least one row".into()));
        }
        if rows.iter().flatten().any(|&n| n == 0) {
            return Err(Error::Config("corrugation numbers must be positive".into()));
        }
        Ok(Schedule { rows })
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[u64; 3]] {
        &self.rows
    }

    /// N_{k,i} with k >= 1 and i in 1..=3.
    pub fn n(&self, k: usize, i: usize) -> u64 {
        self.rows[k - 1][i - 1]
    }

    /// The schedule restricted to its first `depth` rows.
    pub fn truncated(&self, depth: usize) -> Schedule {
        Schedule {
            rows: self.rows[..depth.min(self.rows.len())].to_vec(),
        }
    }

    /// The schedule with every number multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Schedule {
        Schedule {
            rows: self.rows.iter().map(|r| r.map(|n| n * factor)).collect(),
        }
    }

    /// M = gcd of all corrugation numbers.
    pub fn m(&self) -> u64 {
        self.rows.iter().flatten().fold(0, |g, &n| gcd(g, n))
    }

    /// L = gcd of the numbers of the two angular directions.
    pub fn l(&self) -> u64 {
        self.l_from(1)
    }

    /// L_j = gcd of N_{k,2}, N_{k,3} over k >= j.
    pub fn l_from(&self, j: usize) -> u64 {
        self.rows
            .iter()
            .skip(j.saturating_sub(1))
            .fold(0, |g, r| gcd(gcd(g, r[1]), r[2]))
    }

    /// Angular period 2 pi / (7 L_j) of the pattern from level j on.
    pub fn angular_period(&self, j: usize) -> f64 {
        std::f64::consts::TAU / (7.0 * self.l_from(j) as f64)
    }

    /// Stages (k, i) in process order.
    pub fn stages(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.depth()).flat_map(|k| (1..=3).map(move |i| (k, i)))
    }
}
