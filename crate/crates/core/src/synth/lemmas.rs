//! Monte-Carlo and closed-form checks of the embedding and regularity identities.
//!
//! Trial `i` of check `c` draws from stream `(c << 40) | i` of the user seed;
//! fixed inputs (tree, profiles, base graphs) come from stream `u64::MAX`.
//! A [`TrialRunner`] may evaluate trials in any order or in parallel, but
//! returns them in trial order and they are summed sequentially.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::rng::stream_rng;
use super::{motif_profile, StructuralClass};
use crate::dense::RealMatrix;
use crate::error::{Error, Result};
use crate::graph_basis::{regularity_closed_form, scaling_inner_closed_form, GraphBasis};
use crate::partition::PartitionTree;
use crate::spectra::{regularity, relaxed_time_regularity, Boundary};

pub const MIN_TRIALS: usize = 100;

/// Evaluates `trial(i)` for `i in 0..trials`, returning results in index order.
pub trait TrialRunner {
    fn run(&self, trials: usize, trial: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TrialRunner for Sequential {
    fn run(&self, trials: usize, trial: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        (0..trials).map(trial).collect()
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { mean, stderr: libm::sqrt(var / n as f64), trials: n }
    }

    /// `|mean − expected| ≤ z·stderr`, or within `1e−9` when the samples are constant.
    pub fn agrees_with(&self, expected: f64, z: f64) -> bool {
        let diff = (self.mean - expected).abs();
        diff <= z * self.stderr || diff < 1e-9
    }
}

/// Problem sizes for the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaSizes {
    /// Relation count `M` (a power of two).
    pub relations: usize,
    pub level: u32,
    /// Stream length for the link-stream identities.
    pub len_t: usize,
    /// Edge probability of the random graphs.
    pub density: f64,
}

impl Default for LemmaSizes {
    fn default() -> Self {
        Self { relations: 64, level: 3, len_t: 32, density: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaConfig {
    pub sizes: LemmaSizes,
    pub trials: usize,
    pub seed: u64,
    /// Pass threshold in standard errors.
    pub z: f64,
}

impl LemmaConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { sizes: LemmaSizes::default(), trials, seed, z: 4.0 }
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaCheck {
    pub lemma: String,
    pub statistic: String,
    pub expected: f64,
    pub observed: f64,
    pub stderr: f64,
    pub pass: bool,
}

impl LemmaCheck {
    fn exact(lemma: &str, statistic: &str, expected: f64, observed: f64) -> Self {
        Self {
            lemma: lemma.to_string(),
            statistic: statistic.to_string(),
            expected,
            observed,
            stderr: 0.0,
            pass: (expected - observed).abs() < 1e-9,
        }
    }

    fn monte_carlo(lemma: &str, statistic: &str, expected: f64, est: McEstimate, z: f64) -> Self {
        Self {
            lemma: lemma.to_string(),
            statistic: statistic.to_string(),
            expected,
            observed: est.mean,
            stderr: est.stderr,
            pass: est.agrees_with(expected, z),
        }
    }
}

fn trial_rng(seed: u64, check: u64, i: usize) -> ChaCha8Rng {
    stream_rng(seed, (check << 40) | i as u64)
}

fn bernoulli_graph(rng: &mut ChaCha8Rng, m: usize, p: f64) -> Vec<f64> {
    (0..m).map(|_| if rng.gen_bool(p) { 1.0 } else { 0.0 }).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `dist` on 0/1 vectors: relations active in `a` but not in `b`.
fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).filter(|&(&x, &y)| x == 1.0 && y == 0.0).count() as f64
}

fn edit(a: &[f64], b: &[f64]) -> f64 {
    dist(a, b) + dist(b, a)
}

/// Maximum of the per-trial values (all residuals are nonnegative).
fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Run the checks for lemma `lemma` (1 to 4).
///
/// * 1: `‖x‖² = |E|`, `⟨x1, x2⟩ = |E1 ∩ E2|`, `‖x1 − x2‖² = edit` on random
///   pairs; observed is the largest residual.
/// * 2: scaling-vector closed forms, and Monte-Carlo means of `|E1 ∩ Ẽ1|`,
///   `|E1 ∩ E2|` and `edit(G1, G2) − dist(G1, G̃1) − dist(G2, G̃2)` over
///   independent class draws.
/// * 3: graph regularity against its closed form and `E[dist(G, G*)]`.
/// * 4: `reg_t` against the circular edit sum, `reg_e` against the per-slice
///   closed form and `E[Σ_t dist(G_t, G_t*)]`, and the relaxed time
///   regularity of a stream drawn from one class.
pub fn verify_lemma(lemma: u8, config: &LemmaConfig, runner: &(dyn TrialRunner + Sync)) -> Result<Vec<LemmaCheck>> {
    if config.trials < MIN_TRIALS {
        return Err(Error::TooFewTrials { trials: config.trials, min: MIN_TRIALS });
    }
    let s = config.sizes;
    if !crate::is_power_of_two(s.relations) {
        return Err(Error::NotPowerOfTwo { what: "relation count", value: s.relations });
    }
    if !(0.0..=1.0).contains(&s.density) {
        return Err(Error::InvalidParameter("density must lie in [0, 1]".into()));
    }
    if s.len_t == 0 {
        return Err(Error::InvalidParameter("stream length must be positive".into()));
    }
    let mut setup = stream_rng(config.seed, u64::MAX);
    let mut leaves: Vec<usize> = (0..s.relations).collect();
    leaves.shuffle(&mut setup);
    let tree = Arc::new(PartitionTree::from_leaves(leaves)?);
    let basis = GraphBasis::new(tree.clone(), s.level)?;
    match lemma {
        1 => Ok(lemma_one(&basis, config, runner)),
        2 => lemma_two(&basis, config, runner, &mut setup),
        3 => lemma_three(&basis, config, runner, &mut setup),
        4 => lemma_four(&basis, config, runner, &mut setup),
        _ => Err(Error::InvalidParameter(alloc::format!("no lemma {lemma}; expected 1 to 4"))),
    }
}

fn lemma_one(basis: &GraphBasis, config: &LemmaConfig, runner: &(dyn TrialRunner + Sync)) -> Vec<LemmaCheck> {
    let (m, p, seed) = (basis.len(), config.sizes.density, config.seed);
    let residual = |which: u64| {
        move |i: usize| {
            let mut rng = trial_rng(seed, 1, i);
            let f1 = bernoulli_graph(&mut rng, m, p);
            let f2 = bernoulli_graph(&mut rng, m, p);
            let (x1, x2) = (basis.analyze_values(&f1), basis.analyze_values(&f2));
            match which {
                0 => (dot(&x1, &x1) - dot(&f1, &f1)).abs(),
                1 => (dot(&x1, &x2) - dot(&f1, &f2)).abs(),
                _ => {
                    let d: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a - b).collect();
                    (dot(&d, &d) - edit(&f1, &f2)).abs()
                }
            }
        }
    };
    ["norm equals edge count", "inner product equals common edges", "distance equals edit distance"]
        .iter()
        .enumerate()
        .map(|(w, name)| {
            let r = max_of(&runner.run(config.trials, &residual(w as u64)));
            LemmaCheck::exact("1", name, 0.0, r)
        })
        .collect()
}

fn random_profile(rng: &mut ChaCha8Rng, sets: usize, level: u32) -> Vec<usize> {
    (0..sets).map(|_| rng.gen_range(0..=1usize << level)).collect()
}

fn lemma_two(
    basis: &GraphBasis,
    config: &LemmaConfig,
    runner: &(dyn TrialRunner + Sync),
    setup: &mut ChaCha8Rng,
) -> Result<Vec<LemmaCheck>> {
    let (j, seed, z) = (basis.level(), config.seed, config.z);
    let ns = basis.num_scaling();
    let c1 = StructuralClass::new(basis.tree().clone(), j, random_profile(setup, ns, j))?;
    let c2 = StructuralClass::new(basis.tree().clone(), j, random_profile(setup, ns, j))?;
    let g1 = c1.sample_weights(setup);
    let g2 = c2.sample_weights(setup);
    let s1 = basis.analyze_values(&g1)[..ns].to_vec();
    let s2 = basis.analyze_values(&g2)[..ns].to_vec();
    let (p1, p2) = (c1.profile(), c2.profile());
    let norm_closed = scaling_inner_closed_form(p1, p1, j);
    let inner_closed = scaling_inner_closed_form(p1, p2, j);
    let diff: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a - b).collect();
    let dist_sq = dot(&diff, &diff);
    let size = (1u64 << j) as f64;
    // Σ_k (m1 − r12) + (m2 − r12) − (m1 − r11) − (m2 − r22)
    let dist_closed: f64 = p1
        .iter()
        .zip(p2)
        .map(|(&a, &b)| {
            let (a, b) = (a as f64, b as f64);
            (a - a * b / size) + (b - a * b / size) - (a - a * a / size) - (b - b * b / size)
        })
        .sum();

    let own = |i: usize| {
        let mut rng = trial_rng(seed, 2, i);
        let a = c1.sample_weights(&mut rng);
        let b = c1.sample_weights(&mut rng);
        dot(&a, &b)
    };
    let cross = |i: usize| {
        let mut rng = trial_rng(seed, 3, i);
        let a = c1.sample_weights(&mut rng);
        let b = c2.sample_weights(&mut rng);
        dot(&a, &b)
    };
    let distance = |i: usize| {
        let mut rng = trial_rng(seed, 4, i);
        let a = c1.sample_weights(&mut rng);
        let a2 = c1.sample_weights(&mut rng);
        let b = c2.sample_weights(&mut rng);
        let b2 = c2.sample_weights(&mut rng);
        edit(&a, &b) - dist(&a, &a2) - dist(&b, &b2)
    };
    let n = config.trials;
    Ok(alloc::vec![
        LemmaCheck::exact("2.1", "squared scaling norm vs closed form", norm_closed, dot(&s1, &s1)),
        LemmaCheck::exact("2.2", "scaling inner product vs closed form", inner_closed, dot(&s1, &s2)),
        LemmaCheck::exact("2.3", "scaling distance vs expected-distance identity", dist_closed, dist_sq),
        LemmaCheck::monte_carlo("2.1", "mean common edges within one class", norm_closed, McEstimate::from_samples(&runner.run(n, &own)), z),
        LemmaCheck::monte_carlo("2.2", "mean common edges across classes", inner_closed, McEstimate::from_samples(&runner.run(n, &cross)), z),
        LemmaCheck::monte_carlo("2.3", "mean edit minus within-class distances", dist_sq, McEstimate::from_samples(&runner.run(n, &distance)), z),
    ])
}

fn lemma_three(
    basis: &GraphBasis,
    config: &LemmaConfig,
    runner: &(dyn TrialRunner + Sync),
    setup: &mut ChaCha8Rng,
) -> Result<Vec<LemmaCheck>> {
    let j = basis.level();
    let g = bernoulli_graph(setup, basis.len(), config.sizes.density);
    let class = StructuralClass::new(basis.tree().clone(), j, motif_profile(basis.tree(), j, &g))?;
    let reg = basis.regularity_values(&g);
    let closed = regularity_closed_form(class.profile(), j);
    let seed = config.seed;
    let trial = |i: usize| dist(&g, &class.sample_weights(&mut trial_rng(seed, 5, i)));
    let est = McEstimate::from_samples(&runner.run(config.trials, &trial));
    Ok(alloc::vec![
        LemmaCheck::exact("3", "graph regularity vs closed form", closed, reg),
        LemmaCheck::monte_carlo("3", "mean distance to a class draw", reg, est, config.z),
    ])
}

fn lemma_four(
    basis: &GraphBasis,
    config: &LemmaConfig,
    runner: &(dyn TrialRunner + Sync),
    setup: &mut ChaCha8Rng,
) -> Result<Vec<LemmaCheck>> {
    let (j, t_len, m) = (basis.level(), config.sizes.len_t, basis.len());
    let mut l = RealMatrix::zeros(t_len, m);
    for t in 0..t_len {
        let row = bernoulli_graph(setup, m, config.sizes.density);
        l.row_mut(t).copy_from_slice(&row);
    }
    let reg = regularity(&l, basis, Boundary::Circular)?;
    let edits: f64 = (0..t_len).map(|t| edit(l.row(t), l.row((t + t_len - 1) % t_len))).sum();
    let classes: Vec<StructuralClass> = (0..t_len)
        .map(|t| StructuralClass::new(basis.tree().clone(), j, motif_profile(basis.tree(), j, l.row(t))))
        .collect::<Result<_>>()?;
    let closed: f64 = classes.iter().map(|c| regularity_closed_form(c.profile(), j)).sum();
    let seed = config.seed;
    let l_ref = &l;
    let classes_ref = &classes;
    let trial = move |i: usize| {
        let mut rng = trial_rng(seed, 6, i);
        (0..t_len).map(|t| dist(l_ref.row(t), &classes_ref[t].sample_weights(&mut rng))).sum::<f64>()
    };
    let est = McEstimate::from_samples(&runner.run(config.trials, &trial));

    let mut same = RealMatrix::zeros(t_len, m);
    for t in 0..t_len {
        let row = classes[0].sample_weights(setup);
        same.row_mut(t).copy_from_slice(&row);
    }
    let relaxed = relaxed_time_regularity(&same, basis, Boundary::Circular)?;
    Ok(alloc::vec![
        LemmaCheck::exact("4", "time regularity vs circular edit sum", edits, reg.time),
        LemmaCheck::exact("4", "edge regularity vs per-slice closed form", closed, reg.edge),
        LemmaCheck::monte_carlo("4", "mean summed distance to class draws", reg.edge, est, config.z),
        LemmaCheck {
            lemma: "4".to_string(),
            statistic: "relaxed time regularity of one-class stream".to_string(),
            expected: 0.0,
            observed: relaxed,
            stderr: 0.0,
            pass: relaxed < 1e-10,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_constant_samples() {
        let e = McEstimate::from_samples(&[2.0; 10]);
        assert_eq!((e.mean, e.stderr, e.trials), (2.0, 0.0, 10));
        assert!(e.agrees_with(2.0, 4.0));
        assert!(!e.agrees_with(2.1, 4.0));
    }

    #[test]
    fn too_few_trials() {
        assert!(matches!(
            verify_lemma(1, &LemmaConfig::new(10, 0), &Sequential),
            Err(Error::TooFewTrials { trials: 10, min: 100 })
        ));
        assert!(verify_lemma(5, &LemmaConfig::new(100, 0), &Sequential).is_err());
    }

    #[test]
    fn empty_pair_gives_zero_residuals() {
        let mut cfg = LemmaConfig::new(100, 1);
        cfg.sizes.density = 0.0;
        for c in verify_lemma(1, &cfg, &Sequential).unwrap() {
            assert_eq!(c.observed, 0.0);
            assert!(c.pass);
        }
    }

    #[test]
    fn all_lemmas_pass() {
        for lemma in 1..=4 {
            let report = verify_lemma(lemma, &LemmaConfig::new(2000, 7), &Sequential).unwrap();
            for c in &report {
                assert!(c.pass, "{c:?}");
            }
        }
    }

    #[test]
    fn hypergeometric_example() {
        // 2^j = 4, m1 = 2, m2 = 3 → expected overlap 1.5
        let tree = Arc::new(PartitionTree::identity(4).unwrap());
        let c1 = StructuralClass::new(tree.clone(), 2, alloc::vec![2]).unwrap();
        let c2 = StructuralClass::new(tree, 2, alloc::vec![3]).unwrap();
        assert_eq!(scaling_inner_closed_form(c1.profile(), c2.profile(), 2), 1.5);
        let samples: Vec<f64> = (0..20_000)
            .map(|i| {
                let mut rng = trial_rng(3, 0, i);
                dot(&c1.sample_weights(&mut rng), &c2.sample_weights(&mut rng))
            })
            .collect();
        assert!(McEstimate::from_samples(&samples).agrees_with(1.5, 4.0));
    }

    #[test]
    fn single_motif_regularity_example() {
        let tree = Arc::new(PartitionTree::identity(4).unwrap());
        let basis = GraphBasis::new(tree.clone(), 2).unwrap();
        let g = [1.0, 1.0, 0.0, 0.0];
        assert_eq!(basis.regularity_values(&g), 1.0);
        let class = StructuralClass::new(tree, 2, alloc::vec![2]).unwrap();
        let samples: Vec<f64> =
            (0..20_000).map(|i| dist(&g, &class.sample_weights(&mut trial_rng(4, 0, i)))).collect();
        assert!(McEstimate::from_samples(&samples).agrees_with(1.0, 4.0));
    }
}
