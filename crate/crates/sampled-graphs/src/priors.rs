//! Discrete priors over degrees and per-edge triangle counts, and the
//! procedures that build them: empirical distributions of a reference graph,
//! stochastic minimisation of a rescaled degree sequence, a high-to-low
//! cascade that spreads degree over unobserved nodes, and a Poisson prior
//! keyed to the estimated triangles-per-edge rate.

use std::io::{BufRead, BufReader, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::{edge_triangle_counts, Graph};
use crate::sampling::SampledGraph;

/// Probability mass function over `0..=support_max()`. Entries are
/// non-negative and sum to 1; trailing zero mass is trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePrior {
    pmf: Vec<f64>,
}

impl DiscretePrior {
    /// Normalizes non-negative weights into a pmf.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<DiscretePrior> {
        while weights.len() > 1 && weights.last() == Some(&0.0) {
            weights.pop();
        }
        if weights.is_empty() {
            return Err(Error::InvalidPrior {
                reason: "no support values".into(),
            });
        }
        let mut total = 0.0;
        for (v, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidPrior {
                    reason: format!("weight {w} at value {v}"),
                });
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::InvalidPrior {
                reason: "zero total mass".into(),
            });
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(DiscretePrior { pmf: weights })
    }

    /// Empirical pmf of a histogram of counts.
    pub fn from_counts(counts: &[u64]) -> Result<DiscretePrior> {
        DiscretePrior::from_weights(counts.iter().map(|&c| c as f64).collect())
    }

    /// Mass at `value`; 0 beyond the stored support.
    pub fn prob(&self, value: u64) -> f64 {
        self.pmf.get(value as usize).copied().unwrap_or(0.0)
    }

    /// Largest value with stored mass (trailing zeros trimmed).
    pub fn support_max(&self) -> u64 {
        (self.pmf.len() - 1) as u64
    }

    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(v, &w)| v as f64 * w)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    /// `(value, probability)` pairs with non-zero mass.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, &w)| (v as u64, w))
    }

    /// Writes `value,probability` CSV rows (non-zero mass only).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "value,probability")?;
        for (v, mass) in self.iter_nonzero() {
            writeln!(w, "{v},{mass}")?;
        }
        Ok(())
    }

    /// Reads a `value,probability` CSV as produced by
    /// [`DiscretePrior::write_csv`]. The header row is required, duplicate
    /// values are rejected, and the weights are renormalized.
    pub fn read_csv<R: Read>(r: R) -> Result<DiscretePrior> {
        let invalid = |reason: String| Error::InvalidPrior { reason };
        let mut lines = BufReader::new(r).lines().enumerate();
        match lines.next() {
            Some((_, Ok(header))) if header.trim() == "value,probability" => {}
            Some((_, Ok(header))) => {
                return Err(invalid(format!(
                    "expected header \"value,probability\", found {header:?}"
                )))
            }
            Some((_, Err(e))) => return Err(invalid(format!("read failure: {e}"))),
            None => return Err(invalid("empty prior file".into())),
        }
        let mut weights: Vec<f64> = Vec::new();
        let mut seen: Vec<bool> = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| invalid(format!("read failure: {e}")))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let at = |reason: String| invalid(format!("line {}: {reason}", idx + 1));
            let (value, mass) = trimmed
                .split_once(',')
                .ok_or_else(|| at(format!("expected value,probability, found {trimmed:?}")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|e| at(format!("bad value {value:?}: {e}")))?;
            let mass: f64 = mass
                .trim()
                .parse()
                .map_err(|e| at(format!("bad probability {mass:?}: {e}")))?;
            if value >= weights.len() {
                weights.resize(value + 1, 0.0);
                seen.resize(value + 1, false);
            }
            if seen[value] {
                return Err(at(format!("duplicate value {value}")));
            }
            seen[value] = true;
            weights[value] = mass;
        }
        DiscretePrior::from_weights(weights)
    }
}

/// Empirical degree distribution of a reference graph.
pub fn true_prior_degree(reference: &Graph) -> Result<DiscretePrior> {
    if reference.node_count() == 0 {
        return Err(Error::InvalidPrior {
            reason: "reference graph has no nodes".into(),
        });
    }
    DiscretePrior::from_counts(&reference.degree_histogram())
}

/// Empirical distribution of per-edge triangle counts of a reference graph.
pub fn true_prior_triangles(reference: &Graph) -> Result<DiscretePrior> {
    if reference.edge_count() == 0 {
        return Err(Error::InvalidPrior {
            reason: "reference graph has no edges".into(),
        });
    }
    let tc = edge_triangle_counts(reference);
    let max = tc.per_edge().iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u64; max as usize + 1];
    for &t in tc.per_edge() {
        counts[t as usize] += 1;
    }
    DiscretePrior::from_counts(&counts)
}

fn floor_div(value: f64, p: f64) -> u64 {
    (value / p).floor() as u64
}

/// Scaled-up observed degrees with the shared balancing step: start from
/// `floor(k_obs / p)` per node and nudge random nodes until the sum hits
/// `floor(2 M_obs / p)`, never dropping below the observed degree.
fn balanced_kappa(s: &SampledGraph, rng: &mut ChaCha8Rng) -> Result<(Vec<u64>, u64)> {
    let p = s.p();
    let observed: Vec<u64> = s.graph().degrees().iter().map(|&k| k as u64).collect();
    let target = floor_div(2.0 * s.graph().edge_count() as f64, p);
    let observed_sum: u64 = observed.iter().sum();
    if target < observed_sum {
        return Err(Error::PriorConstruction {
            reason: format!("degree-sum target {target} below observed sum {observed_sum}"),
        });
    }
    let mut kappa: Vec<u64> = observed.iter().map(|&k| floor_div(k as f64, p)).collect();
    let mut sum: u64 = kappa.iter().sum();
    if !kappa.is_empty() {
        while sum < target {
            let i = rng.gen_range(0..kappa.len());
            kappa[i] += 1;
            sum += 1;
        }
        while sum > target {
            let i = rng.gen_range(0..kappa.len());
            if kappa[i] > observed[i] {
                kappa[i] -= 1;
                sum -= 1;
            }
        }
    }
    Ok((kappa, target))
}

fn empirical_prior(kappa: &[u64]) -> Result<DiscretePrior> {
    let max = kappa.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u64; max as usize + 1];
    for &k in kappa {
        counts[k as usize] += 1;
    }
    DiscretePrior::from_counts(&counts)
}

/// Output of [`minimisation_prior`]: the fitted degree sequence (aligned with
/// sample node order), its empirical pmf, and the accepted-move trace of the
/// squared-error objective.
#[derive(Debug, Clone)]
pub struct MinimisationResult {
    pub kappa: Vec<u64>,
    pub prior: DiscretePrior,
    pub initial_error: f64,
    pub final_error: f64,
    pub accepted: usize,
    /// Objective after each accepted transfer, starting with the initial
    /// value; strictly decreasing by construction.
    pub objective_trace: Vec<f64>,
}

/// Fits a degree sequence to the sample by stochastic local search: after
/// balancing (see [`minimisation principle`](self)), `iterations` single-unit
/// transfers are proposed between random (receiver, donor) pairs and accepted
/// only when they strictly decrease `sum over nodes of (p*kappa - k_obs)^2`.
/// Returns the sequence and its empirical pmf.
pub fn minimisation_prior(
    s: &SampledGraph,
    iterations: usize,
    seed: u64,
) -> Result<MinimisationResult> {
    let p = s.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observed: Vec<u64> = s.graph().degrees().iter().map(|&k| k as u64).collect();
    let (mut kappa, target) = balanced_kappa(s, &mut rng)?;

    let node_error = |kap: u64, obs: u64| {
        let d = p * kap as f64 - obs as f64;
        d * d
    };
    let initial_error: f64 = kappa
        .iter()
        .zip(&observed)
        .map(|(&k, &o)| node_error(k, o))
        .sum();
    let mut error = initial_error;
    let mut trace = vec![initial_error];
    let mut accepted = 0usize;

    if kappa.len() >= 2 {
        for _ in 0..iterations {
            let receiver = rng.gen_range(0..kappa.len());
            let donor = rng.gen_range(0..kappa.len());
            if receiver == donor || kappa[donor] == observed[donor] {
                continue;
            }
            let delta = node_error(kappa[receiver] + 1, observed[receiver])
                + node_error(kappa[donor] - 1, observed[donor])
                - node_error(kappa[receiver], observed[receiver])
                - node_error(kappa[donor], observed[donor]);
            // Ties count as rejections; the margin keeps rounding noise in the
            // squared terms from sneaking a zero-improvement move through.
            if delta < -1e-9 {
                kappa[receiver] += 1;
                kappa[donor] -= 1;
                error += delta;
                accepted += 1;
                trace.push(error);
                debug_assert_eq!(kappa.iter().sum::<u64>(), target);
            }
        }
    }

    let final_error: f64 = kappa
        .iter()
        .zip(&observed)
        .map(|(&k, &o)| node_error(k, o))
        .sum();
    let prior = empirical_prior(&kappa)?;
    Ok(MinimisationResult {
        kappa,
        prior,
        initial_error,
        final_error,
        accepted,
        objective_trace: trace,
    })
}

/// Output of [`link_cascade_prior`]: the full degree sequence over
/// `n_original` nodes (sampled nodes first, in sample order, then the
/// unobserved placeholders), its empirical pmf, and the number of cascade
/// transfers performed.
#[derive(Debug, Clone)]
pub struct CascadeResult {
    pub kappa: Vec<u64>,
    pub prior: DiscretePrior,
    pub steps: usize,
}

/// Spreads the balanced degree sequence over all `n_original` nodes of the
/// unobserved parent: unobserved nodes start at degree zero, and degree
/// cascades from high to low until nobody is left at zero. Each step finds
/// the first zero-degree node in `(degree desc, node index asc)` order and
/// moves one unit from the nearest preceding node that can spare it (degree
/// at least 2), re-sorting after every transfer.
pub fn link_cascade_prior(s: &SampledGraph, n_original: usize, seed: u64) -> Result<CascadeResult> {
    let sampled = s.graph().node_count();
    if n_original < sampled {
        return Err(Error::PriorConstruction {
            reason: format!("n_original {n_original} below sampled node count {sampled}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut kappa, target) = balanced_kappa(s, &mut rng)?;
    if (target as u128) < n_original as u128 {
        return Err(Error::PriorConstruction {
            reason: format!(
                "degree-sum target {target} cannot give all {n_original} nodes degree 1"
            ),
        });
    }
    kappa.resize(n_original, 0);

    // (degree, original position); sorted by degree descending, position
    // ascending. Re-sorted after every transfer; driftsort handles the
    // nearly-sorted case in linear time.
    let mut order: Vec<(u64, usize)> = kappa.iter().copied().zip(0..).collect();
    let sort_key = |&(k, idx): &(u64, usize)| (std::cmp::Reverse(k), idx);
    order.sort_unstable_by_key(sort_key);
    let mut steps = 0usize;
    loop {
        let first_zero = order.partition_point(|&(k, _)| k > 0);
        if first_zero == order.len() {
            break;
        }
        let donor = order[..first_zero]
            .iter()
            .rposition(|&(k, _)| k >= 2)
            .expect("target >= n_original guarantees a donor above every zero");
        order[donor].0 -= 1;
        order[first_zero].0 += 1;
        steps += 1;
        assert!(steps as u64 <= target, "cascade exceeded its step bound");
        order.sort_unstable_by_key(sort_key);
    }
    for &(k, idx) in &order {
        kappa[idx] = k;
    }
    debug_assert_eq!(kappa.iter().sum::<u64>(), target);

    let prior = empirical_prior(&kappa)?;
    Ok(CascadeResult {
        kappa,
        prior,
        steps,
    })
}

/// Estimated triangles-per-edge rate of the parent graph: moment-matched
/// triangle total over moment-matched edge total, `3 (T_obs / p^3) / (M_obs / p)`.
pub fn poisson_lambda(s: &SampledGraph) -> Result<f64> {
    let m_obs = s.graph().edge_count();
    if m_obs == 0 {
        return Err(Error::PriorConstruction {
            reason: "sample has no edges".into(),
        });
    }
    let p = s.p();
    let t_obs = edge_triangle_counts(s.graph()).total() as f64;
    Ok(3.0 * t_obs / (p * p * m_obs as f64))
}

/// Poisson prior over per-edge triangle counts with rate [`poisson_lambda`],
/// truncated at `max(ceil(lambda + 10 sqrt(lambda + 1)), largest observed
/// count)` and renormalized.
pub fn poisson_triangle_prior(s: &SampledGraph) -> Result<DiscretePrior> {
    let lambda = poisson_lambda(s)?;
    let observed_max = edge_triangle_counts(s.graph())
        .per_edge()
        .iter()
        .copied()
        .max()
        .unwrap_or(0);
    let sigma_cap = (lambda + 10.0 * (lambda + 1.0).sqrt()).ceil() as u64;
    let t_max = sigma_cap.max(observed_max);
    let weights: Vec<f64> = (0..=t_max)
        .map(|t| {
            if lambda == 0.0 {
                return if t == 0 { 1.0 } else { 0.0 };
            }
            (t as f64 * lambda.ln() - lambda - ln_gamma(t as f64 + 1.0)).exp()
        })
        .collect();
    DiscretePrior::from_weights(weights)
}
