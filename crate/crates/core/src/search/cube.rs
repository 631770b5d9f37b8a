use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Largest supported resolution; indices are stored as `u16`.
pub const MAX_RESOLUTION: u32 = 1 << 16;

/// Product of arcs `I^{p_1}_n × … × I^{p_k}_n` with
/// `I^p_n = [2pπ/n, 2(p+1)π/n]` and `p_1 <= … <= p_k < n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngleCube {
    n: u32,
    k: u8,
    p: [u16; 5],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeParseError(pub String);

impl fmt::Display for CubeParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad cube record: {}", self.0)
    }
}

impl std::error::Error for CubeParseError {}

impl AngleCube {
    /// `None` unless `1 <= k <= 5`, `n <= MAX_RESOLUTION` and the indices are
    /// non-decreasing and below `n`.
    pub fn new(n: u32, indices: &[u32]) -> Option<Self> {
        let k = indices.len();
        if !(1..=5).contains(&k) || n == 0 || n > MAX_RESOLUTION {
            return None;
        }
        if indices.windows(2).any(|w| w[0] > w[1]) || indices[k - 1] >= n {
            return None;
        }
        let mut p = [0u16; 5];
        for (dst, &src) in p.iter_mut().zip(indices) {
            *dst = src as u16;
        }
        Some(Self { n, k: k as u8, p })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k as usize
    }

    #[inline]
    pub fn indices(&self) -> &[u16] {
        &self.p[..self.k()]
    }

    /// `β_i = 2(p_i + ½)π/n`. Every point of the cube is within `π/n` of the
    /// center in each coordinate.
    pub fn center_angles(&self) -> Vec<f64> {
        self.indices().iter().map(|&p| self.center_of(p)).collect()
    }

    #[inline]
    pub(crate) fn center_of(&self, p: u16) -> f64 {
        2.0 * (p as f64 + 0.5) * PI / self.n as f64
    }

    /// Closed arc of coordinate `i`.
    pub fn arc(&self, i: usize) -> (f64, f64) {
        let p = self.p[i] as f64;
        let n = self.n as f64;
        (2.0 * p * PI / n, 2.0 * (p + 1.0) * PI / n)
    }

    /// Children at resolution `2n` with indices `2p_i` or `2p_i + 1`; only
    /// non-decreasing index tuples are kept. Every ordered tuple of the parent
    /// lies in some child.
    pub fn subdivide(&self) -> Vec<AngleCube> {
        let k = self.k();
        let mut out = Vec::with_capacity(1 << k);
        for mask in 0u32..(1 << k) {
            let mut p = [0u16; 5];
            let mut ordered = true;
            for i in 0..k {
                let bit = (mask >> (k - 1 - i)) & 1;
                p[i] = 2 * self.p[i] + bit as u16;
                if i > 0 && p[i] < p[i - 1] {
                    ordered = false;
                    break;
                }
            }
            if ordered {
                out.push(AngleCube { n: 2 * self.n, k: self.k, p });
            }
        }
        out
    }

    /// Largest circular index gap `p_{i+1} − p_i` (with `p_{k+1} = p_1 + n`).
    /// Center gaps are this many multiples of `2π/n`.
    pub fn max_index_gap(&self) -> u32 {
        let idx = self.indices();
        let wrap = idx[0] as u32 + self.n - idx[idx.len() - 1] as u32;
        idx.windows(2).map(|w| (w[1] - w[0]) as u32).fold(wrap, u32::max)
    }

    /// Whether a tuple lies in the closed box.
    pub fn contains(&self, alphas: &[f64]) -> bool {
        alphas.len() == self.k()
            && alphas.iter().enumerate().all(|(i, &a)| {
                let (lo, hi) = self.arc(i);
                a >= lo - 1e-12 && a <= hi + 1e-12
            })
    }

    /// Deterministic 64-bit mix of the cube's fields.
    pub fn mix_hash(&self) -> u64 {
        let mut h = splitmix64(self.n as u64 ^ ((self.k as u64) << 32));
        for &p in self.indices() {
            h = splitmix64(h ^ p as u64);
        }
        h
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `k n p1 .. pk`.
impl fmt::Display for AngleCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.k, self.n)?;
        for p in self.indices() {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

impl FromStr for AngleCube {
    type Err = CubeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let nums: Vec<u32> = s
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|_| CubeParseError(s.to_string())))
            .collect::<Result<_, _>>()?;
        if nums.len() < 3 || nums[0] as usize != nums.len() - 2 {
            return Err(CubeParseError(s.to_string()));
        }
        AngleCube::new(nums[1], &nums[2..]).ok_or_else(|| CubeParseError(s.to_string()))
    }
}

/// Lexicographic enumeration of all `p_1 <= … <= p_k < n0`.
#[derive(Clone, Debug)]
pub struct InitialCubes {
    n: u32,
    k: usize,
    next: Option<[u16; 5]>,
}

impl Iterator for InitialCubes {
    type Item = AngleCube;

    fn next(&mut self) -> Option<AngleCube> {
        let cur = self.next?;
        let cube = AngleCube { n: self.n, k: self.k as u8, p: cur };
        // Advance: bump the rightmost index that can grow, reset the tail.
        let mut p = cur;
        let mut i = self.k;
        self.next = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            if (p[i] as u32) + 1 < self.n {
                p[i] += 1;
                for j in i + 1..self.k {
                    p[j] = p[i];
                }
                break Some(p);
            }
        };
        Some(cube)
    }
}

pub fn initial_cubes(k: usize, n0: u32) -> InitialCubes {
    assert!((1..=5).contains(&k) && (1..=MAX_RESOLUTION).contains(&n0));
    InitialCubes { n: n0, k, next: Some([0; 5]) }
}

/// `C(n0 + k − 1, k)`: number of initial cubes.
pub fn initial_cube_count(k: usize, n0: u32) -> u64 {
    binomial(n0 as u64 + k as u64 - 1, k as u64)
}

pub fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}
