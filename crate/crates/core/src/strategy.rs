//! The mixed photon decision strategy and its entangled-only baseline.
//!
//! One shared state machine drives both players (they pool their reward
//! information) through three phases:
//!
//! * **Explore** — play the zero-conflict entangled configuration for `si`
//!   steps, so each machine is sampled exactly once per step, and count the
//!   full-unit wins per machine;
//! * **Check** — deliberately conflict on the estimated-best machine for
//!   `cp` steps: a full-unit win under conflict proves that machine's happy
//!   hour is on and promotes immediately, while halves and losses just
//!   spend the span — a half proves the hour is off *right now*, but the
//!   hour could still open mid-span, so the probe runs its course;
//! * **Exploit** — keep conflicting on the machine, where every full-unit
//!   win restarts a `cp`-step budget of winless play: a half win marks the
//!   happy hour's end, and `cp` consecutive losses mean the double-pay
//!   signal has gone quiet; either way the players return to exploring.
//!
//! The win counters persist for the whole episode — every return to
//! exploration adds to the same tallies, so estimates sharpen as evidence
//! accumulates instead of starting over each interval.

use thiserror::Error;

use crate::optics::{
    waveplates_for_exploit, waveplates_for_explore, MachineChoice, SourceMode, WaveplateSetting,
};
use crate::rng::RngStream;

/// Tunable spans of the mixed strategy: exploration length (`si`) and
/// check length (`cp`), both in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyParams {
    pub si: u64,
    pub cp: u64,
}

impl StrategyParams {
    pub fn new(si: u64, cp: u64) -> Self {
        assert!(si >= 1, "search interval must be at least 1");
        assert!(cp >= 1, "check span must be at least 1");
        Self { si, cp }
    }
}

/// Current phase of the shared strategy.
///
/// Check and Exploit are the same correlated play distinguished by whether a
/// full-unit win has confirmed the happy hour yet; both run on the same
/// budget of `cp` winless steps, which only an exploit-phase full win
/// refills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Explore { steps_done: u64 },
    Check { m: MachineChoice, steps_done: u64 },
    Exploit { m: MachineChoice, losses_in_row: u64 },
}

/// Everything the strategy remembers: the episode-long win tallies and the
/// phase it is currently playing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyState {
    /// Full-unit exploration wins seen on machine A so far this episode.
    pub l_a: u64,
    /// Likewise for machine B.
    pub l_b: u64,
    pub phase: Phase,
}

/// What the pair of players saw on one step: who played what, who got paid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub choices: (MachineChoice, MachineChoice),
    pub rewards: (f64, f64),
}

/// An observation that cannot have come from playing this state's photon
/// configuration — always a harness wiring bug, never a statistical event.
#[derive(Debug, Error, PartialEq)]
pub enum StrategyError {
    #[error("exploration step observed a conflict on machine {0}")]
    ExploreConflict(MachineChoice),
    #[error("expected a conflicted play on machine {expected}, observed ({got_1}, {got_2})")]
    MisdirectedConflict {
        expected: MachineChoice,
        got_1: MachineChoice,
        got_2: MachineChoice,
    },
    #[error("reward {0} is outside the dispenser support {{0, 0.5, 1}}")]
    RewardOffSupport(f64),
}

impl StrategyState {
    /// Fresh strategy: explore with zeroed tallies.
    pub fn initial() -> Self {
        StrategyState {
            l_a: 0,
            l_b: 0,
            phase: Phase::Explore { steps_done: 0 },
        }
    }

    /// Photon source and wave-plate setting to play in this state.
    pub fn photon_config(&self) -> (SourceMode, WaveplateSetting) {
        match self.phase {
            Phase::Explore { .. } => waveplates_for_explore(),
            Phase::Check { m, .. } | Phase::Exploit { m, .. } => waveplates_for_exploit(m),
        }
    }

    /// Consumes one step's observation and returns the next state.
    ///
    /// `rng` is touched only for the occasional exploration tie-break.
    pub fn advance(
        self,
        params: &StrategyParams,
        obs: &Observation,
        rng: &mut RngStream,
    ) -> Result<Self, StrategyError> {
        for r in [obs.rewards.0, obs.rewards.1] {
            if r != 0.0 && r != 0.5 && r != 1.0 {
                return Err(StrategyError::RewardOffSupport(r));
            }
        }
        let unity = obs.rewards.0 == 1.0 || obs.rewards.1 == 1.0;
        let half = obs.rewards.0 == 0.5 || obs.rewards.1 == 0.5;
        let (c1, c2) = obs.choices;

        let Self { mut l_a, mut l_b, phase } = self;
        let phase = match phase {
            Phase::Explore { steps_done } => {
                if c1 == c2 {
                    return Err(StrategyError::ExploreConflict(c1));
                }
                // Exactly one player sat at each machine; credit each
                // machine's tally with that player's full-unit win.
                let (r_a, r_b) = if c1 == MachineChoice::A {
                    (obs.rewards.0, obs.rewards.1)
                } else {
                    (obs.rewards.1, obs.rewards.0)
                };
                l_a += (r_a == 1.0) as u64;
                l_b += (r_b == 1.0) as u64;
                let steps_done = steps_done + 1;
                if steps_done == params.si {
                    Phase::Check {
                        m: estimate_best_machine(l_a, l_b, rng),
                        steps_done: 0,
                    }
                } else {
                    Phase::Explore { steps_done }
                }
            }
            Phase::Check { m, steps_done } => {
                expect_conflict_on(m, c1, c2)?;
                if unity {
                    // Full unit under an intentional conflict: happy hour on.
                    Phase::Exploit { m, losses_in_row: 0 }
                } else {
                    // Halves and losses alike just tick the span; the hour
                    // may still open before it runs out.
                    let steps_done = steps_done + 1;
                    if steps_done == params.cp {
                        Phase::Explore { steps_done: 0 }
                    } else {
                        Phase::Check { m, steps_done }
                    }
                }
            }
            Phase::Exploit { m, losses_in_row } => {
                expect_conflict_on(m, c1, c2)?;
                if unity {
                    Phase::Exploit { m, losses_in_row: 0 }
                } else if half {
                    // Half unit under conflict: the happy hour is over.
                    Phase::Explore { steps_done: 0 }
                } else {
                    // A loss is inconclusive, but the budget for winless
                    // correlated play is the same `cp` used for checking;
                    // once it runs dry the double-pay signal has gone quiet
                    // for too long to keep betting on it.
                    let losses_in_row = losses_in_row + 1;
                    if losses_in_row == params.cp {
                        Phase::Explore { steps_done: 0 }
                    } else {
                        Phase::Exploit { m, losses_in_row }
                    }
                }
            }
        };
        Ok(Self { l_a, l_b, phase })
    }
}

fn expect_conflict_on(
    m: MachineChoice,
    c1: MachineChoice,
    c2: MachineChoice,
) -> Result<(), StrategyError> {
    if c1 != m || c2 != m {
        return Err(StrategyError::MisdirectedConflict {
            expected: m,
            got_1: c1,
            got_2: c2,
        });
    }
    Ok(())
}

/// Maximum-likelihood pick from equal-denominator win counts: strict
/// majority wins, ties are broken by a fair coin (one draw, only on ties).
pub fn estimate_best_machine(l_a: u64, l_b: u64, rng: &mut RngStream) -> MachineChoice {
    use std::cmp::Ordering;
    match l_a.cmp(&l_b) {
        Ordering::Greater => MachineChoice::A,
        Ordering::Less => MachineChoice::B,
        Ordering::Equal => {
            if rng.uniform_below(2) == 0 {
                MachineChoice::A
            } else {
                MachineChoice::B
            }
        }
    }
}

/// The stateless baseline: entangled explore configuration at every step,
/// no checking, no exploiting.
pub fn entangled_only_config() -> (SourceMode, WaveplateSetting) {
    waveplates_for_explore()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{dispense, HappyHourSchedule, MachinesSpec};
    use crate::optics::joint_distribution;
    use proptest::prelude::*;
    use MachineChoice::{A, B};

    fn state(l_a: u64, l_b: u64, phase: Phase) -> StrategyState {
        StrategyState { l_a, l_b, phase }
    }

    fn obs(choices: (MachineChoice, MachineChoice), rewards: (f64, f64)) -> Observation {
        Observation { choices, rewards }
    }

    #[test]
    fn initial_state_explores_entangled() {
        let fresh = StrategyState::initial();
        assert_eq!(fresh, state(0, 0, Phase::Explore { steps_done: 0 }));
        let (mode, wp) = fresh.photon_config();
        let d = joint_distribution(mode, wp);
        assert_eq!(d.conflict_probability(), 0.0);
        assert!((d.p_ab - 0.5).abs() < 1e-15);
    }

    #[test]
    fn photon_config_follows_phase() {
        let d = |phase: Phase| {
            let (mode, wp) = state(0, 0, phase).photon_config();
            joint_distribution(mode, wp).components()
        };
        assert_eq!(
            d(Phase::Check { m: A, steps_done: 0 }),
            [1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            d(Phase::Exploit {
                m: B,
                losses_in_row: 0
            }),
            [0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn estimator_majority_and_ties() {
        let mut rng = RngStream::seed_from(17);
        assert_eq!(estimate_best_machine(9, 4, &mut rng), A);
        assert_eq!(estimate_best_machine(0, 7, &mut rng), B);

        // Majority calls must not consume randomness.
        let mut rng = RngStream::seed_from(17);
        let twin = rng.clone();
        estimate_best_machine(3, 1, &mut rng);
        assert_eq!(rng, twin);

        // Ties split evenly.
        let n = 100_000u32;
        let mut picks_a = 0u32;
        for _ in 0..n {
            if estimate_best_machine(5, 5, &mut rng) == A {
                picks_a += 1;
            }
        }
        let freq = picks_a as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 4.0 * sigma, "freq={freq}");
    }

    #[test]
    fn explore_counts_wins_and_hands_off_to_check() {
        let params = StrategyParams::new(14, 2);
        let mut rng = RngStream::seed_from(1);
        let explore = |steps_done| Phase::Explore { steps_done };

        // Mid-exploration: a B-side win counted for the player who sat at B.
        let next = state(2, 1, explore(4))
            .advance(&params, &obs((B, A), (1.0, 0.0)), &mut rng)
            .unwrap();
        assert_eq!(next, state(2, 2, explore(5)));

        // Final exploration step promotes the leader; the tallies stay.
        let next = state(8, 3, explore(13))
            .advance(&params, &obs((A, B), (1.0, 0.0)), &mut rng)
            .unwrap();
        assert_eq!(next, state(9, 3, Phase::Check { m: A, steps_done: 0 }));
    }

    #[test]
    fn tallies_accumulate_across_intervals() {
        // A failed check does not wipe the evidence: the next interval adds
        // to the same tallies, and the next estimate uses the totals.
        let params = StrategyParams::new(2, 1);
        let mut rng = RngStream::seed_from(3);

        let s = StrategyState::initial();
        let s = s.advance(&params, &obs((A, B), (1.0, 0.0)), &mut rng).unwrap();
        let s = s.advance(&params, &obs((A, B), (1.0, 0.0)), &mut rng).unwrap();
        assert_eq!(s, state(2, 0, Phase::Check { m: A, steps_done: 0 }));

        // The check comes up empty and the one-step span expires.
        let s = s.advance(&params, &obs((A, A), (0.0, 0.0)), &mut rng).unwrap();
        assert_eq!(s, state(2, 0, Phase::Explore { steps_done: 0 }));

        // Second interval: B wins twice, yet the running totals now read
        // 2–2, so the estimator flips a coin instead of following recency.
        let s = s.advance(&params, &obs((B, A), (1.0, 0.0)), &mut rng).unwrap();
        assert_eq!((s.l_a, s.l_b), (2, 1));
        let picks: Vec<_> = (0u64..64)
            .map(|seed| {
                let mut rng = RngStream::seed_from(seed);
                let s = s.advance(&params, &obs((B, A), (1.0, 0.0)), &mut rng).unwrap();
                match s.phase {
                    Phase::Check { m, .. } => m,
                    other => panic!("expected a check, got {other:?}"),
                }
            })
            .collect();
        assert!(picks.contains(&A) && picks.contains(&B));
    }

    #[test]
    fn check_spends_its_full_span_unless_a_unit_lands() {
        let params = StrategyParams::new(14, 3);
        let mut rng = RngStream::seed_from(2);
        let check = |steps_done| state(5, 1, Phase::Check { m: A, steps_done });

        // Full-unit win from either player: happy hour confirmed, even on
        // what would have been the span's last step.
        for rewards in [(1.0, 1.0), (1.0, 0.0), (0.0, 1.0)] {
            let next = check(params.cp - 1)
                .advance(&params, &obs((A, A), rewards), &mut rng)
                .unwrap();
            assert_eq!(next, state(5, 1, Phase::Exploit { m: A, losses_in_row: 0 }));
        }

        // A loss ticks the span counter…
        let next = check(0)
            .advance(&params, &obs((A, A), (0.0, 0.0)), &mut rng)
            .unwrap();
        assert_eq!(next, check(1));

        // …and so does a half win: it rules out the hour only for this
        // step, not for the rest of the span.
        let next = check(1)
            .advance(&params, &obs((A, A), (0.5, 0.0)), &mut rng)
            .unwrap();
        assert_eq!(next, check(2));

        // Expiry returns to exploration with the tallies intact.
        let next = check(params.cp - 1)
            .advance(&params, &obs((A, A), (0.5, 0.5)), &mut rng)
            .unwrap();
        assert_eq!(next, state(5, 1, Phase::Explore { steps_done: 0 }));
    }

    #[test]
    fn exploit_budget_refills_on_wins_and_drains_on_losses() {
        let params = StrategyParams::new(14, 2);
        let mut rng = RngStream::seed_from(3);
        let exploit = |losses_in_row| state(7, 2, Phase::Exploit { m: A, losses_in_row });

        // A full win refills the loss budget even mid-drain.
        let next = exploit(1)
            .advance(&params, &obs((A, A), (1.0, 1.0)), &mut rng)
            .unwrap();
        assert_eq!(next, exploit(0));

        // Losses drain it one step at a time, then end the ride; the
        // tallies survive the trip back.
        let next = exploit(0)
            .advance(&params, &obs((A, A), (0.0, 0.0)), &mut rng)
            .unwrap();
        assert_eq!(next, exploit(1));
        let next = exploit(params.cp - 1)
            .advance(&params, &obs((A, A), (0.0, 0.0)), &mut rng)
            .unwrap();
        assert_eq!(next, state(7, 2, Phase::Explore { steps_done: 0 }));

        // A half win ends it immediately regardless of budget.
        let next = exploit(0)
            .advance(&params, &obs((A, A), (0.5, 0.5)), &mut rng)
            .unwrap();
        assert_eq!(next, state(7, 2, Phase::Explore { steps_done: 0 }));
    }

    #[test]
    fn inconsistent_observations_are_rejected() {
        let params = StrategyParams::new(3, 2);
        let mut rng = RngStream::seed_from(4);

        let err = StrategyState::initial()
            .advance(&params, &obs((A, A), (0.5, 0.5)), &mut rng)
            .unwrap_err();
        assert_eq!(err, StrategyError::ExploreConflict(A));

        let err = state(0, 0, Phase::Check { m: A, steps_done: 0 })
            .advance(&params, &obs((A, B), (1.0, 0.0)), &mut rng)
            .unwrap_err();
        assert!(matches!(err, StrategyError::MisdirectedConflict { expected: A, .. }));

        let err = state(0, 0, Phase::Exploit { m: B, losses_in_row: 0 })
            .advance(&params, &obs((B, B), (0.25, 0.25)), &mut rng)
            .unwrap_err();
        assert_eq!(err, StrategyError::RewardOffSupport(0.25));
    }

    #[test]
    fn baseline_config_is_constant_and_conflict_free() {
        let (mode, wp) = entangled_only_config();
        assert_eq!((mode, wp), waveplates_for_explore());
        let d = joint_distribution(mode, wp);
        assert_eq!(d.conflict_probability(), 0.0);
    }

    proptest! {
        /// Drives the full strategy/environment loop and checks every
        /// structural claim the state machine makes: phase reachability,
        /// counter bounds, tally monotonicity, and the exact successor of
        /// every Check and Exploit step.
        #[test]
        fn closed_loop_invariants(
            si in 1u64..12,
            cp in 1u64..5,
            p_a in 0.0f64..=1.0,
            p_b in 0.0f64..=1.0,
            period in proptest::option::of(1u64..40),
            seed: u64,
        ) {
            let params = StrategyParams::new(si, cp);
            let machines = MachinesSpec::new(p_a, p_b);
            let mut rng = RngStream::seed_from(seed);
            let schedule = HappyHourSchedule::draw(&machines, period, &mut rng);
            let mut state = StrategyState::initial();
            let mut explore_steps = 0u64;

            for t in 1..=300u64 {
                let (mode, wp) = state.photon_config();
                let dist = joint_distribution(mode, wp);
                let choices = dist.sample(&mut rng);
                let out = dispense(&machines, &schedule, t, choices, &mut rng);
                let observation = Observation {
                    choices,
                    rewards: (out.reward_1, out.reward_2),
                };
                let next = state.advance(&params, &observation, &mut rng).unwrap();

                let any_hit = out.hit_1 || out.hit_2;
                match state.phase {
                    Phase::Explore { steps_done } => {
                        prop_assert!(steps_done < si);
                        explore_steps += 1;
                        // Entangled play: one player per machine, every step.
                        prop_assert_ne!(choices.0, choices.1);
                        // Tallies only grow, at most one win per machine.
                        prop_assert!(next.l_a >= state.l_a && next.l_b >= state.l_b);
                        prop_assert!(next.l_a - state.l_a <= 1 && next.l_b - state.l_b <= 1);
                        match next.phase {
                            Phase::Explore { steps_done: n } => {
                                prop_assert_eq!(n, steps_done + 1);
                            }
                            Phase::Check { steps_done: n, .. } => {
                                prop_assert_eq!(steps_done + 1, si);
                                prop_assert_eq!(n, 0);
                            }
                            Phase::Exploit { .. } => {
                                prop_assert!(false, "explore cannot jump to exploit");
                            }
                        }
                    }
                    Phase::Check { m, steps_done } => {
                        prop_assert!(steps_done < cp);
                        prop_assert_eq!(choices, (m, m));
                        prop_assert_eq!((next.l_a, next.l_b), (state.l_a, state.l_b));
                        let full_pay =
                            any_hit && out.happy_active && m == schedule.happy_machine();
                        let expected = if full_pay {
                            // Promotion requires a genuine happy-hour win.
                            Phase::Exploit { m, losses_in_row: 0 }
                        } else if steps_done + 1 == cp {
                            Phase::Explore { steps_done: 0 }
                        } else {
                            Phase::Check { m, steps_done: steps_done + 1 }
                        };
                        prop_assert_eq!(next.phase, expected);
                    }
                    Phase::Exploit { m, losses_in_row } => {
                        prop_assert!(losses_in_row < cp);
                        prop_assert_eq!(choices, (m, m));
                        prop_assert_eq!((next.l_a, next.l_b), (state.l_a, state.l_b));
                        let full_pay =
                            any_hit && out.happy_active && m == schedule.happy_machine();
                        let expected = if full_pay {
                            // Full pay refills the winless-play budget.
                            Phase::Exploit { m, losses_in_row: 0 }
                        } else if any_hit {
                            // A hit outside the happy hour pays half: over.
                            Phase::Explore { steps_done: 0 }
                        } else if losses_in_row + 1 == cp {
                            Phase::Explore { steps_done: 0 }
                        } else {
                            Phase::Exploit { m, losses_in_row: losses_in_row + 1 }
                        };
                        prop_assert_eq!(next.phase, expected);
                    }
                }

                // Tallies never exceed the exploration steps played so far.
                prop_assert!(next.l_a <= explore_steps && next.l_b <= explore_steps);
                state = next;
            }
        }
    }
}
