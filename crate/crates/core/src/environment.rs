//! The two-machine casino: reward probabilities, the periodic happy-hour
//! schedule, and the per-step dispensing rules.
//!
//! Every pull is its own Bernoulli trial of the chosen machine, so two
//! players crowding the same machine draw two independent outcomes from the
//! same odds. A winning pull pays a full unit — except under a decision
//! conflict, where each winner collects only half, unless that machine is
//! currently in a happy hour, in which case every winner keeps the full
//! unit. A winning solo play therefore looks identical inside and outside a
//! happy hour; only an intentional conflict can tell the two apart.

use crate::optics::MachineChoice;
use crate::rng::RngStream;

/// Win probabilities of the two slot machines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachinesSpec {
    pub p_a: f64,
    pub p_b: f64,
}

impl MachinesSpec {
    pub fn new(p_a: f64, p_b: f64) -> Self {
        assert!((0.0..=1.0).contains(&p_a), "p_a out of [0,1]: {p_a}");
        assert!((0.0..=1.0).contains(&p_b), "p_b out of [0,1]: {p_b}");
        Self { p_a, p_b }
    }

    /// The machine eligible for happy hours: the higher-probability one,
    /// with ties going to A.
    pub fn favored_machine(&self) -> MachineChoice {
        if self.p_a >= self.p_b {
            MachineChoice::A
        } else {
            MachineChoice::B
        }
    }
}

/// Periodic happy-hour schedule for the favored machine.
///
/// With period `T` and a starting offset, the favored machine alternates
/// `T` happy steps and `T` ordinary steps; step `t` is happy exactly when
/// `(t − offset) mod 2T` (mapped into `[0, 2T)`) falls in `[0, T)`. The
/// schedule extends periodically before the offset as well, so every step
/// index from 1 up is classified. A schedule may also be disabled entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HappyHourSchedule {
    period_t: Option<u64>,
    offset: u64,
    happy_machine: MachineChoice,
}

impl HappyHourSchedule {
    /// No happy hours; every step is ordinary.
    pub fn disabled(machines: &MachinesSpec) -> Self {
        Self {
            period_t: None,
            offset: 0,
            happy_machine: machines.favored_machine(),
        }
    }

    /// Schedule with an explicit offset in `{1, …, 2T}`.
    pub fn with_offset(machines: &MachinesSpec, period_t: u64, offset: u64) -> Self {
        assert!(period_t >= 1, "happy-hour period must be positive");
        assert!(
            (1..=2 * period_t).contains(&offset),
            "offset {offset} outside 1..={}",
            2 * period_t
        );
        Self {
            period_t: Some(period_t),
            offset,
            happy_machine: machines.favored_machine(),
        }
    }

    /// Draws the offset uniformly from `{1, …, 2T}`, consuming one draw from
    /// `rng`; a `None` period consumes nothing and yields a disabled schedule.
    pub fn draw(machines: &MachinesSpec, period_t: Option<u64>, rng: &mut RngStream) -> Self {
        match period_t {
            None => Self::disabled(machines),
            Some(t) => {
                assert!(t >= 1, "happy-hour period must be positive");
                let offset = 1 + rng.uniform_below(2 * t);
                Self::with_offset(machines, t, offset)
            }
        }
    }

    pub fn period(&self) -> Option<u64> {
        self.period_t
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn happy_machine(&self) -> MachineChoice {
        self.happy_machine
    }

    /// Whether step `t` (1-indexed) falls in a happy hour.
    pub fn is_happy(&self, t: u64) -> bool {
        assert!(t >= 1, "step indices are 1-based");
        match self.period_t {
            None => false,
            Some(period) => {
                let phase = (t as i64 - self.offset as i64).rem_euclid(2 * period as i64);
                (phase as u64) < period
            }
        }
    }
}

/// Everything observable about one step of play. `hit_1`/`hit_2` record
/// whether each player's own pull paid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward_1: f64,
    pub reward_2: f64,
    pub hit_1: bool,
    pub hit_2: bool,
    pub happy_active: bool,
}

/// Plays one step: draws each player's pull (player 1 first, then player 2 —
/// both draws are consumed every step regardless of the choices, so the
/// outcome sequence depends only on the seed), then settles rewards under
/// the conflict and happy-hour rules.
pub fn dispense(
    machines: &MachinesSpec,
    schedule: &HappyHourSchedule,
    t: u64,
    choices: (MachineChoice, MachineChoice),
    rng: &mut RngStream,
) -> StepOutcome {
    let p = |m: MachineChoice| match m {
        MachineChoice::A => machines.p_a,
        MachineChoice::B => machines.p_b,
    };
    let (c1, c2) = choices;
    let hit_1 = rng.uniform01() < p(c1);
    let hit_2 = rng.uniform01() < p(c2);
    let happy_active = schedule.is_happy(t);

    let conflicted = c1 == c2;
    let pay = |hit: bool, m: MachineChoice| {
        if !hit {
            0.0
        } else if !conflicted || (happy_active && m == schedule.happy_machine()) {
            1.0
        } else {
            0.5
        }
    };

    StepOutcome {
        reward_1: pay(hit_1, c1),
        reward_2: pay(hit_2, c2),
        hit_1,
        hit_2,
        happy_active,
    }
}
