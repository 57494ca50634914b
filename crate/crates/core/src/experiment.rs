//! Seeded episodes, Monte Carlo aggregation, and the parameter sweeps.
//!
//! Every repetition derives its own child seed from the master seed and the
//! repetition index, so results are bit-identical no matter how many threads
//! run the repetitions or in what order they finish. All rewards are
//! multiples of 0.5, so totals and their sums are exact in `f64` and the
//! reduction order cannot change a single bit.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::environment::{dispense, HappyHourSchedule, MachinesSpec};
use crate::optics::{joint_distribution, MachineChoice};
use crate::rng::{child_seed, RngStream};
use crate::strategy::{entangled_only_config, Observation, Phase, StrategyParams, StrategyState};

/// Which decision policy an episode runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Entangled exploration with correlated check/exploit phases.
    Mixed,
    /// The conflict-free entangled configuration at every step.
    EntangledOnly,
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StrategyKind::Mixed => write!(f, "mixed"),
            StrategyKind::EntangledOnly => write!(f, "entangled-only"),
        }
    }
}

/// Complete description of one simulation setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub machines: MachinesSpec,
    /// Happy-hour half-period in steps; `None` disables the schedule.
    pub happy_period: Option<u64>,
    pub params: StrategyParams,
    pub strategy_kind: StrategyKind,
    pub steps: u64,
    pub reps: u64,
    pub master_seed: u64,
}

impl RunConfig {
    /// Standard episode shape: 1500 steps, 1000 repetitions, seed 0.
    pub fn new(
        machines: MachinesSpec,
        happy_period: Option<u64>,
        params: StrategyParams,
        strategy_kind: StrategyKind,
    ) -> Self {
        Self {
            machines,
            happy_period,
            params,
            strategy_kind,
            steps: 1500,
            reps: 1000,
            master_seed: 0,
        }
    }
}

/// One step of an episode trace, for diagnostics and plotting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTrace {
    pub t: u64,
    pub choices: (MachineChoice, MachineChoice),
    pub rewards: (f64, f64),
    pub happy_active: bool,
}

/// Outcome of a single seeded episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Both players' rewards summed over all steps.
    pub total_reward: f64,
    pub per_player: (f64, f64),
    pub trace: Option<Vec<StepTrace>>,
}

/// Runs one repetition: seeds a child stream from `(master_seed, rep_index)`,
/// draws the happy-hour offset (when enabled), then plays `steps` steps.
pub fn run_episode(config: &RunConfig, rep_index: u64) -> EpisodeResult {
    run_episode_inner(config, rep_index, false)
}

/// As [`run_episode`], additionally recording every step.
pub fn run_episode_traced(config: &RunConfig, rep_index: u64) -> EpisodeResult {
    run_episode_inner(config, rep_index, true)
}

fn run_episode_inner(config: &RunConfig, rep_index: u64, record: bool) -> EpisodeResult {
    assert!(config.steps >= 1, "episodes must have at least one step");
    let mut rng = RngStream::seed_from(child_seed(config.master_seed, rep_index));
    let schedule = HappyHourSchedule::draw(&config.machines, config.happy_period, &mut rng);

    // The strategy only ever requests three photon configurations; compute
    // their distributions once (via the state's own mapping) instead of
    // redoing the trigonometry on every step.
    let dist_for = |phase: Phase| {
        let (mode, wp) = StrategyState { l_a: 0, l_b: 0, phase }.photon_config();
        joint_distribution(mode, wp)
    };
    let explore_dist = dist_for(Phase::Explore { steps_done: 0 });
    let conflict_a = dist_for(Phase::Exploit {
        m: MachineChoice::A,
        losses_in_row: 0,
    });
    let conflict_b = dist_for(Phase::Exploit {
        m: MachineChoice::B,
        losses_in_row: 0,
    });
    let baseline_dist = {
        let (mode, wp) = entangled_only_config();
        joint_distribution(mode, wp)
    };

    let mut state = StrategyState::initial();
    let mut totals = (0.0f64, 0.0f64);
    let mut trace = record.then(|| Vec::with_capacity(config.steps as usize));

    for t in 1..=config.steps {
        let dist = match config.strategy_kind {
            StrategyKind::EntangledOnly => &baseline_dist,
            StrategyKind::Mixed => match state.phase {
                Phase::Explore { .. } => &explore_dist,
                Phase::Check { m, .. } | Phase::Exploit { m, .. } => match m {
                    MachineChoice::A => &conflict_a,
                    MachineChoice::B => &conflict_b,
                },
            },
        };
        let choices = dist.sample(&mut rng);
        let out = dispense(&config.machines, &schedule, t, choices, &mut rng);
        totals.0 += out.reward_1;
        totals.1 += out.reward_2;
        if let Some(trace) = trace.as_mut() {
            trace.push(StepTrace {
                t,
                choices,
                rewards: (out.reward_1, out.reward_2),
                happy_active: out.happy_active,
            });
        }
        if config.strategy_kind == StrategyKind::Mixed {
            let observation = Observation {
                choices,
                rewards: (out.reward_1, out.reward_2),
            };
            state = state
                .advance(&config.params, &observation, &mut rng)
                .expect("episode loop plays the state's own configuration");
        }
    }

    EpisodeResult {
        total_reward: totals.0 + totals.1,
        per_player: totals,
        trace,
    }
}

/// Mean and standard error of the total reward over `config.reps`
/// repetitions. Repetitions run in parallel; the reduction is performed in
/// repetition order on exact totals, so the result is thread-count-invariant.
pub fn monte_carlo_mean(config: &RunConfig) -> (f64, f64) {
    assert!(config.reps >= 1, "need at least one repetition");
    let totals: Vec<f64> = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_episode(config, rep).total_reward)
        .collect();
    mean_and_stderr(&totals)
}

/// Sample mean and standard error (sample std over √n); a single sample
/// reports a standard error of zero.
fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One aggregated sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub mean_total_reward: f64,
    pub stderr: f64,
    /// Episodes contributing to this row.
    pub reps: u64,
}

/// Sweep output, sorted by parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Row with the highest mean; earlier rows win ties.
    pub fn argmax(&self) -> &SweepRow {
        self.rows
            .iter()
            .reduce(|best, row| {
                if row.mean_total_reward > best.mean_total_reward {
                    row
                } else {
                    best
                }
            })
            .expect("sweeps are never empty")
    }
}

/// Sweeps the search interval, all other parameters fixed.
pub fn sweep_search_interval(base: &RunConfig, si_range: RangeInclusive<u64>) -> SweepResult {
    assert!(*si_range.start() >= 1 && *si_range.end() <= 200);
    let rows = si_range
        .map(|si| {
            let mut config = *base;
            config.params = StrategyParams::new(si, base.params.cp);
            let (mean, stderr) = monte_carlo_mean(&config);
            SweepRow {
                param: si as f64,
                mean_total_reward: mean,
                stderr,
                reps: config.reps,
            }
        })
        .collect();
    SweepResult { rows }
}

/// Sweeps the check span, averaging each point over the given happy-hour
/// periods. The reported standard error combines the per-period errors as
/// `√(Σ seᵢ²)/k` (the periods are independent runs).
pub fn sweep_check_span(
    base: &RunConfig,
    cp_range: RangeInclusive<u64>,
    t_values: &[u64],
) -> SweepResult {
    assert!(*cp_range.start() >= 1 && *cp_range.end() <= 50);
    assert!(!t_values.is_empty(), "need at least one happy-hour period");
    let rows = cp_range
        .map(|cp| {
            let mut mean_sum = 0.0;
            let mut var_sum = 0.0;
            for &t in t_values {
                let mut config = *base;
                config.params = StrategyParams::new(base.params.si, cp);
                config.happy_period = Some(t);
                let (mean, stderr) = monte_carlo_mean(&config);
                mean_sum += mean;
                var_sum += stderr * stderr;
            }
            let k = t_values.len() as f64;
            SweepRow {
                param: cp as f64,
                mean_total_reward: mean_sum / k,
                stderr: var_sum.sqrt() / k,
                reps: base.reps * t_values.len() as u64,
            }
        })
        .collect();
    SweepResult { rows }
}

/// One point of a normalized sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedRow {
    pub param: f64,
    pub normalized: f64,
}

/// Sweep mapped through `(R − R_MIN)/(R_MAX − R_MIN)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSweep {
    pub rows: Vec<NormalizedRow>,
    /// Set when the input sweep was flat (all means equal); the rows are
    /// then all zero and carry no shape information.
    pub degenerate: bool,
}

/// Rescales a sweep's means affinely onto [0, 1].
pub fn normalize_rewards(sweep: &SweepResult) -> NormalizedSweep {
    assert!(sweep.rows.len() >= 2, "normalization needs at least two rows");
    let min = sweep
        .rows
        .iter()
        .map(|r| r.mean_total_reward)
        .fold(f64::INFINITY, f64::min);
    let max = sweep
        .rows
        .iter()
        .map(|r| r.mean_total_reward)
        .fold(f64::NEG_INFINITY, f64::max);
    let degenerate = max == min;
    let rows = sweep
        .rows
        .iter()
        .map(|r| NormalizedRow {
            param: r.param,
            normalized: if degenerate {
                0.0
            } else {
                (r.mean_total_reward - min) / (max - min)
            },
        })
        .collect();
    NormalizedSweep { rows, degenerate }
}

/// Pointwise average of normalized sweeps taken over the same parameter
/// grid. The result is degenerate only if every input was.
pub fn average_normalized(profiles: &[NormalizedSweep]) -> NormalizedSweep {
    assert!(!profiles.is_empty(), "nothing to average");
    let mut acc = profiles[0].rows.clone();
    for profile in &profiles[1..] {
        assert_eq!(profile.rows.len(), acc.len(), "mismatched sweep grids");
        for (sum, row) in acc.iter_mut().zip(&profile.rows) {
            assert_eq!(sum.param, row.param, "mismatched sweep grids");
            sum.normalized += row.normalized;
        }
    }
    let k = profiles.len() as f64;
    for row in &mut acc {
        row.normalized /= k;
    }
    NormalizedSweep {
        rows: acc,
        degenerate: profiles.iter().all(|p| p.degenerate),
    }
}

/// Search-interval profile averaged over happy-hour periods: each period's
/// sweep is normalized onto [0, 1] first, then the normalized curves are
/// averaged pointwise, so short- and long-period regimes weigh equally.
pub fn normalized_si_profile(
    base: &RunConfig,
    si_range: RangeInclusive<u64>,
    t_values: &[u64],
) -> NormalizedSweep {
    assert!(!t_values.is_empty(), "need at least one happy-hour period");
    let profiles: Vec<NormalizedSweep> = t_values
        .iter()
        .map(|&t| {
            let mut config = *base;
            config.happy_period = Some(t);
            normalize_rewards(&sweep_search_interval(&config, si_range.clone()))
        })
        .collect();
    average_normalized(&profiles)
}

/// One machine pair's difficulty and its best search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalSiRow {
    /// `1 − (p_a − p_b)`: 0 for a trivially separable pair, 1 for equal machines.
    pub difficulty: f64,
    pub optimal_si: u64,
}

/// For each machine pair, finds the search interval maximizing the
/// period-averaged normalized profile. Ties go to the smaller interval.
pub fn optimal_si_curve(
    prob_pairs: &[(f64, f64)],
    t_values: &[u64],
    si_range: RangeInclusive<u64>,
    base: &RunConfig,
) -> Vec<OptimalSiRow> {
    optimal_si_curve_detailed(prob_pairs, t_values, si_range, base)
        .into_iter()
        .map(|(row, _)| row)
        .collect()
}

/// As [`optimal_si_curve`], but keeping each pair's period-averaged profile
/// alongside its optimum, for diagnostics that need the whole curve.
pub fn optimal_si_curve_detailed(
    prob_pairs: &[(f64, f64)],
    t_values: &[u64],
    si_range: RangeInclusive<u64>,
    base: &RunConfig,
) -> Vec<(OptimalSiRow, NormalizedSweep)> {
    prob_pairs
        .iter()
        .map(|&(p_a, p_b)| {
            assert!(p_a >= p_b, "pairs must list the better machine first");
            let mut config = *base;
            config.machines = MachinesSpec::new(p_a, p_b);
            let profile = normalized_si_profile(&config, si_range.clone(), t_values);
            let best = profile
                .rows
                .iter()
                .reduce(|best, row| if row.normalized > best.normalized { row } else { best })
                .expect("si range is never empty");
            let row = OptimalSiRow {
                difficulty: 1.0 - (p_a - p_b),
                optimal_si: best.param as u64,
            };
            (row, profile)
        })
        .collect()
}
