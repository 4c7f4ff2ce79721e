//! Exact reproducible sampling from the ensemble.
//!
//! Rows of the adjacency matrix are independent, and each out-degree
//! follows the tilted binomial law exactly, so graphs are sampled
//! without any Markov chain: draw every out-degree by inverse CDF, then
//! (only if a full graph is needed) place each row's edges as a uniform
//! random subset of the columns.
//!
//! All randomness is counter-based: a draw is a pure function of
//! `(seed, replica, node, slot)`, so results are bit-identical no matter
//! how the work is scheduled.

use alloc::vec::Vec;

use crate::asymptotics;
use crate::ensemble::{self, ExactDerivatives, TiltedBinomial};
use crate::error::{Error, Result};
use crate::fmath::{self, powu};
use crate::model::ModelParams;
use crate::special::CompensatedSum;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_A: u64 = 0xBB67_AE85_84CA_A73B;
const STREAM_B: u64 = 0x3C6E_F372_FE94_F82B;
const STREAM_C: u64 = 0xA54F_F53A_5F1D_36F1;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless keyed generator: every output is addressed by a
/// three-component counter.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix(seed ^ GOLDEN),
        }
    }

    /// An independent child stream (used to separate node-count cells in
    /// a scaling study).
    pub fn derive(&self, stream: u64) -> Self {
        Self {
            key: mix(self.key ^ stream.wrapping_mul(GOLDEN).wrapping_add(STREAM_A)),
        }
    }

    /// Raw 64-bit output at a counter.
    #[inline]
    pub fn index(&self, counter: [u64; 3]) -> u64 {
        let mut z = self.key;
        z = mix(z ^ counter[0].wrapping_mul(GOLDEN).wrapping_add(STREAM_A));
        z = mix(z ^ counter[1].wrapping_mul(GOLDEN).wrapping_add(STREAM_B));
        z = mix(z ^ counter[2].wrapping_mul(GOLDEN).wrapping_add(STREAM_C));
        z
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&self, counter: [u64; 3]) -> f64 {
        (self.index(counter) >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

#[inline]
fn draw_degree(cdf: &[f64], u: f64) -> u32 {
    let n = cdf.len() - 1;
    cdf.partition_point(|&c| c <= u).min(n) as u32
}

/// Out-degree vectors for `replicas` independent graphs.
///
/// Draw `(r, i)` uses counter `[r, i, 0]`, so any subset of the work can
/// be redone in isolation and parallel scheduling cannot change output.
pub fn sample_degrees(tb: &TiltedBinomial, replicas: u64, seed: u64) -> Result<Vec<Vec<u32>>> {
    if replicas < 1 {
        return Err(Error::Domain {
            what: "sample_degrees requires at least one replica",
            value: replicas as f64,
        });
    }
    let n = tb.n();
    let cdf = tb.cdf();
    let rng = CounterRng::new(seed);
    let mut out = Vec::with_capacity(replicas as usize);
    for r in 0..replicas {
        let mut degrees = Vec::with_capacity(n as usize);
        for i in 0..n {
            degrees.push(draw_degree(&cdf, rng.uniform([r, i, 0])));
        }
        out.push(degrees);
    }
    Ok(out)
}

/// Row-major bit matrix.
#[derive(Clone, Debug)]
pub struct AdjacencyMatrix {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl AdjacencyMatrix {
    fn zeroed(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        Self {
            n,
            words_per_row,
            bits: alloc::vec![0u64; words_per_row * n],
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] |= 1u64 << (j % 64);
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words_per_row + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges leaving node `i`.
    pub fn row_count(&self, i: usize) -> u32 {
        self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
            .iter()
            .map(|w| w.count_ones())
            .sum()
    }
}

/// One sampled graph; the adjacency matrix is only materialized on
/// request since every target statistic is a function of the degrees.
#[derive(Clone, Debug)]
pub struct GraphSample {
    pub n: u64,
    pub degrees: Vec<u32>,
    pub adjacency: Option<AdjacencyMatrix>,
    /// Edge homomorphism density `sum W_i / n^2`.
    pub edge_density: f64,
    /// Star homomorphism density `sum W_i^p / n^(p+1)`.
    pub star_density: f64,
}

fn densities(degrees: &[u32], p: u32) -> (f64, f64) {
    let nf = degrees.len() as f64;
    let total: u64 = degrees.iter().map(|&w| w as u64).sum();
    let mut star = CompensatedSum::new();
    for &w in degrees {
        star.add(powu(w as f64 / nf, p));
    }
    (total as f64 / (nf * nf), star.value() / nf)
}

/// Degree-only sample.
pub fn graph_from_degrees(degrees: Vec<u32>, p: u32) -> GraphSample {
    let (edge_density, star_density) = densities(&degrees, p);
    GraphSample {
        n: degrees.len() as u64,
        degrees,
        adjacency: None,
        edge_density,
        star_density,
    }
}

/// Realize a full graph with the given out-degrees: conditionally on
/// `W_i = w`, row `i` is a uniformly random `w`-subset of the `n`
/// columns (self-loops allowed), placed by partial Fisher-Yates.
pub fn realize_graph(degrees: &[u32], p: u32, seed: u64) -> Result<GraphSample> {
    let n = degrees.len();
    if n == 0 {
        return Err(Error::Domain {
            what: "realize_graph requires a non-empty degree vector",
            value: 0.0,
        });
    }
    for &w in degrees {
        if w as usize > n {
            return Err(Error::Domain {
                what: "a degree exceeds the node count",
                value: w as f64,
            });
        }
    }
    let rng = CounterRng::new(seed);
    let mut adjacency = AdjacencyMatrix::zeroed(n);
    let mut columns: Vec<u32> = (0..n as u32).collect();
    for (i, &w) in degrees.iter().enumerate() {
        for (j, slot) in columns.iter_mut().enumerate() {
            *slot = j as u32;
        }
        for k in 0..w as usize {
            let span = (n - k) as u64;
            let offset = rng.index([i as u64, k as u64, 1]) % span;
            columns.swap(k, k + offset as usize);
            adjacency.set(i, columns[k] as usize);
        }
    }
    let (edge_density, star_density) = densities(degrees, p);
    Ok(GraphSample {
        n: n as u64,
        degrees: degrees.to_vec(),
        adjacency: Some(adjacency),
        edge_density,
        star_density,
    })
}

/// Monte Carlo estimates of the scaled variances and covariance of the
/// edge and star densities, with standard errors.
#[derive(Clone, Copy, Debug)]
pub struct McEstimates {
    pub replicas: u64,
    pub mean_edge: f64,
    pub mean_star: f64,
    /// `n^2 * Var(e)` (unbiased over replicas).
    pub var_edge_scaled: f64,
    pub var_star_scaled: f64,
    pub cov_scaled: f64,
    /// Rao-Blackwellized estimate of P(X_12 = 1): the mean of `W_1 / n`,
    /// which is the exact conditional edge probability given the degree.
    pub edge_freq: f64,
    pub se_mean_edge: f64,
    pub se_mean_star: f64,
    pub se_var_edge: f64,
    pub se_var_star: f64,
    pub se_cov: f64,
    pub se_edge_freq: f64,
}

fn mean(xs: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value() / xs.len() as f64
}

fn central_sum(xs: &[f64], m: f64, pow: u32) -> f64 {
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add(powu(x - m, pow));
    }
    acc.value()
}

/// Standard error of an unbiased sample variance from the fourth
/// central moment: Var(s^2) = m4/R - s^4 (R-3)/(R(R-1)).
fn var_of_sample_var(xs: &[f64], m: f64, s2: f64) -> f64 {
    let r = xs.len() as f64;
    let m4 = central_sum(xs, m, 4) / r;
    (m4 / r - s2 * s2 * (r - 3.0) / (r * (r - 1.0))).max(0.0)
}

/// Sample the ensemble and estimate densities, scaled second moments and
/// the edge frequency.
///
/// Statistics come straight from the degree vectors; no adjacency matrix
/// is ever materialized. Replica accumulation order is fixed, so the
/// result is identical however the sampling is scheduled.
pub fn mc_estimates(
    params: &ModelParams,
    n: u64,
    replicas: u64,
    seed: u64,
) -> Result<McEstimates> {
    if replicas < 2 {
        return Err(Error::Domain {
            what: "variance estimation requires at least two replicas",
            value: replicas as f64,
        });
    }
    let tb = TiltedBinomial::new(*params, n)?;
    let cdf = tb.cdf();
    let rng = CounterRng::new(seed);
    let nf = n as f64;
    let p = params.p();

    let mut e = Vec::with_capacity(replicas as usize);
    let mut s = Vec::with_capacity(replicas as usize);
    let mut w1 = Vec::with_capacity(replicas as usize);
    for r in 0..replicas {
        let mut total: u64 = 0;
        let mut star = CompensatedSum::new();
        let mut first = 0.0;
        for i in 0..n {
            let w = draw_degree(&cdf, rng.uniform([r, i, 0]));
            total += w as u64;
            star.add(powu(w as f64 / nf, p));
            if i == 0 {
                first = w as f64 / nf;
            }
        }
        e.push(total as f64 / (nf * nf));
        s.push(star.value() / nf);
        w1.push(first);
    }

    let rf = replicas as f64;
    let mean_e = mean(&e);
    let mean_s = mean(&s);
    let var_e = central_sum(&e, mean_e, 2) / (rf - 1.0);
    let var_s = central_sum(&s, mean_s, 2) / (rf - 1.0);
    let mut cov_acc = CompensatedSum::new();
    let mut m22_acc = CompensatedSum::new();
    for (x, y) in e.iter().zip(&s) {
        let dx = x - mean_e;
        let dy = y - mean_s;
        cov_acc.add(dx * dy);
        m22_acc.add(dx * dx * dy * dy);
    }
    let cov = cov_acc.value() / (rf - 1.0);
    let m22 = m22_acc.value() / rf;
    let edge_freq = mean(&w1);
    let var_w1 = central_sum(&w1, edge_freq, 2) / (rf - 1.0);

    let n2 = nf * nf;
    Ok(McEstimates {
        replicas,
        mean_edge: mean_e,
        mean_star: mean_s,
        var_edge_scaled: n2 * var_e,
        var_star_scaled: n2 * var_s,
        cov_scaled: n2 * cov,
        edge_freq,
        se_mean_edge: fmath::sqrt(var_e / rf),
        se_mean_star: fmath::sqrt(var_s / rf),
        se_var_edge: n2 * fmath::sqrt(var_of_sample_var(&e, mean_e, var_e)),
        se_var_star: n2 * fmath::sqrt(var_of_sample_var(&s, mean_s, var_s)),
        se_cov: n2 * fmath::sqrt(((m22 - cov * cov) / rf).max(0.0)),
        se_edge_freq: fmath::sqrt(var_w1 / rf),
    })
}

/// One cell of a scaling study: exact values, Monte Carlo estimates and
/// the asymptotic prediction at a single node count.
#[derive(Clone, Debug)]
pub struct ScalingRecord {
    pub n: u64,
    pub exact: ExactDerivatives,
    pub mc: McEstimates,
    pub predicted_var_edge: f64,
    pub predicted_var_star: f64,
    pub predicted_cov: f64,
    /// Power of n in the predicted scaling (0, 1/2 or 1).
    pub scale_exponent: f64,
}

/// Sweep a node-count grid: exact tilted-moment values, Monte Carlo
/// estimates, and the limit-law prediction `constant * n^exponent` for
/// each observable.
pub fn scaling_study(
    params: &ModelParams,
    n_grid: &[u64],
    replicas: u64,
    seed: u64,
) -> Result<Vec<ScalingRecord>> {
    if n_grid.is_empty() {
        return Err(Error::Domain {
            what: "scaling study requires a non-empty n grid",
            value: 0.0,
        });
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain {
            what: "scaling study requires a strictly ascending n grid",
            value: 0.0,
        });
    }
    let limits = asymptotics::limiting_values(params)?;
    let rng = CounterRng::new(seed);
    let mut out = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let exact = ensemble::exact_derivatives(params, n)?;
        let mc = mc_estimates(params, n, replicas, rng.derive(n).key)?;
        let growth = fmath::powf(n as f64, limits.scale_exponent);
        out.push(ScalingRecord {
            n,
            exact,
            mc,
            predicted_var_edge: limits.var_edge * growth,
            predicted_var_star: limits.var_star * growth,
            predicted_cov: limits.cov_edge_star * growth,
            scale_exponent: limits.scale_exponent,
        });
    }
    Ok(out)
}
