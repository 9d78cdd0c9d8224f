//! Knot sequences and deterministic mesh generators.
//!
//! Random meshes use a fixed splitmix64 stream so that experiments are
//! reproducible bit for bit across platforms and implementations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SplineError};

/// Strictly increasing sequence of knots `x_0 < x_1 < ... < x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Mesh {
    knots: Vec<f64>,
}

/// Gap statistics of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub h_max: f64,
    pub h_min: f64,
    /// Number of intervals.
    pub n: usize,
}

impl Mesh {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(SplineError::TooFewKnots {
                needed: 2,
                got: knots.len(),
            });
        }
        if let Some(index) = knots.iter().position(|x| !x.is_finite()) {
            return Err(SplineError::NotIncreasing { index });
        }
        if let Some(i) = knots.windows(2).position(|w| w[0] >= w[1]) {
            return Err(SplineError::NotIncreasing { index: i + 1 });
        }
        Ok(Self { knots })
    }

    /// `n + 1` equally spaced knots on `[a, b]`; both endpoints are exact.
    pub fn equidistant(a: f64, b: f64, n: usize) -> Result<Self> {
        check_interval(a, b, n)?;
        let width = b - a;
        let mut knots: Vec<f64> = (0..=n)
            .map(|i| a + (i as f64) * width / (n as f64))
            .collect();
        knots[n] = b;
        Self::new(knots)
    }

    /// `n + 1` uniform draws from splitmix64, sorted and affinely rescaled so
    /// that the smallest maps to `a` and the largest to `b`.
    pub fn random_uniform(a: f64, b: f64, n: usize, seed: u64) -> Result<Self> {
        check_interval(a, b, n)?;
        let mut rng = SplitMix64::new(seed);
        let mut draws: Vec<f64> = Vec::with_capacity(n + 1);
        while draws.len() < n + 1 {
            let u = rng.next_f64();
            // colliding draws are replaced by the next value of the stream
            if let Err(pos) = draws.binary_search_by(|p| p.total_cmp(&u)) {
                draws.insert(pos, u);
            }
        }
        let (lo, hi) = (draws[0], draws[n]);
        let mut knots: Vec<f64> = draws
            .iter()
            .map(|u| a + (b - a) * ((u - lo) / (hi - lo)))
            .collect();
        knots[0] = a;
        knots[n] = b;
        Self::new(knots)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of intervals `n`.
    pub fn intervals(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Width of interval `i`, i.e. `x_{i+1} - x_i`.
    pub fn gap(&self, i: usize) -> f64 {
        self.knots[i + 1] - self.knots[i]
    }

    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.windows(2).map(|w| w[1] - w[0])
    }

    pub fn stats(&self) -> MeshStats {
        let (h_min, h_max) = self
            .gaps()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), h| (lo.min(h), hi.max(h)));
        MeshStats {
            h_max,
            h_min,
            n: self.intervals(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.first() && x <= self.last()
    }

    /// Mirror image `x -> -x` with the knot order reversed.
    pub fn reflected(&self) -> Mesh {
        Mesh {
            knots: self.knots.iter().rev().map(|x| -x).collect(),
        }
    }

    /// Index `i` with `x_i <= x < x_{i+1}`; the last interval is closed on the right.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let idx = self.knots.partition_point(|&k| k <= x);
        Some(idx.saturating_sub(1).min(self.intervals() - 1))
    }

    /// One knot per line, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.knots.len() * 25);
        for x in &self.knots {
            let _ = writeln!(out, "{}", fmt17(*x));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let knots = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| SplineError::InvalidParameter(format!("bad knot `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(knots)
    }

    /// Short content hash of the knot bit patterns.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for x in &self.knots {
            hasher.update(x.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}

impl TryFrom<Vec<f64>> for Mesh {
    type Error = SplineError;

    fn try_from(knots: Vec<f64>) -> Result<Self> {
        Mesh::new(knots)
    }
}

impl From<Mesh> for Vec<f64> {
    fn from(m: Mesh) -> Self {
        m.knots
    }
}

fn check_interval(a: f64, b: f64, n: usize) -> Result<()> {
    if a >= b || !a.is_finite() || !b.is_finite() {
        return Err(SplineError::DegenerateInterval { a, b });
    }
    if n == 0 {
        return Err(SplineError::ZeroIntervals);
    }
    Ok(())
}

/// Round-trip-exact decimal formatting with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn equidistant_quarter_pi() {
        let m = Mesh::equidistant(0.0, PI, 4).unwrap();
        let want = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
        for (x, w) in m.knots().iter().zip(want) {
            assert!((x - w).abs() <= 4.0 * f64::EPSILON * PI, "{x} vs {w}");
        }
        assert_eq!(m.knots()[0], 0.0);
        assert_eq!(m.knots()[4], PI);
    }

    #[test]
    fn equidistant_minimal_and_stats() {
        let m = Mesh::equidistant(0.0, 1.0, 1).unwrap();
        assert_eq!(m.knots(), &[0.0, 1.0]);

        let m = Mesh::equidistant(-1.0, 3.0, 23).unwrap();
        assert_eq!(m.len(), 24);
        let st = m.stats();
        assert!((st.h_max - 4.0 / 23.0).abs() < 1e-15);
        assert!((st.h_min - 4.0 / 23.0).abs() < 1e-15);
        assert_eq!(st.n, 23);

        let st = Mesh::equidistant(0.0, 1.0, 4).unwrap().stats();
        assert_eq!((st.h_max, st.h_min), (0.25, 0.25));
    }

    #[test]
    fn stats_irregular() {
        let st = Mesh::new(vec![0.0, 1.0, 3.0]).unwrap().stats();
        assert_eq!(st.h_max, 2.0);
        assert_eq!(st.h_min, 1.0);
        assert_eq!(st.n, 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Mesh::equidistant(1.0, 1.0, 3),
            Err(SplineError::DegenerateInterval { .. })
        ));
        assert!(matches!(
            Mesh::equidistant(0.0, 1.0, 0),
            Err(SplineError::ZeroIntervals)
        ));
        assert!(matches!(
            Mesh::random_uniform(2.0, 1.0, 3, 7),
            Err(SplineError::DegenerateInterval { .. })
        ));
        assert!(matches!(
            Mesh::new(vec![0.0, 1.0, 1.0]),
            Err(SplineError::NotIncreasing { index: 2 })
        ));
        assert!(Mesh::new(vec![0.0]).is_err());
        assert!(Mesh::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn splitmix_reference_stream() {
        // reference values of splitmix64 seeded with 0
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn random_mesh_pins_endpoints() {
        let m = Mesh::random_uniform(0.0, 1.0, 1, 12345).unwrap();
        assert_eq!(m.knots(), &[0.0, 1.0]);

        let (a, b) = (PI / 4.0, 5.0 * PI / 4.0);
        let m = Mesh::random_uniform(a, b, 95, 3).unwrap();
        assert_eq!(m.len(), 96);
        assert_eq!(m.knots()[0], a);
        assert_eq!(m.knots()[95], b);
        let st = m.stats();
        assert!(st.h_max * 95.0 >= b - a);
    }

    #[test]
    fn random_mesh_first_interior_knot() {
        // hand-run recipe: 11 draws from seed 42, sorted, rescaled
        let mut rng = SplitMix64::new(42);
        let mut u: Vec<f64> = (0..11).map(|_| rng.next_f64()).collect();
        u.sort_by(f64::total_cmp);
        let want = (u[1] - u[0]) / (u[10] - u[0]);
        let m = Mesh::random_uniform(0.0, 1.0, 10, 42).unwrap();
        assert_eq!(m.knots()[1], want);
        assert!((m.knots()[1] - 0.146_808_638_231_055_42).abs() < 1e-15);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let m = Mesh::random_uniform(-1.0, 3.0, 17, 9).unwrap();
        let back = Mesh::from_csv(&m.to_csv()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn locate_is_right_continuous() {
        let m = Mesh::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.locate(0.0), Some(0));
        assert_eq!(m.locate(1.0), Some(1));
        assert_eq!(m.locate(2.5), Some(2));
        assert_eq!(m.locate(3.0), Some(2));
        assert_eq!(m.locate(3.5), None);
        assert_eq!(m.locate(-0.1), None);
    }

    #[test]
    fn reflection() {
        let m = Mesh::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(m.reflected().knots(), &[-3.0, -1.0, -0.0]);
    }
}
