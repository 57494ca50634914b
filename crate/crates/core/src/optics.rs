//! Photon-pair decision optics.
//!
//! Each play sends one photon pair through two half-wave plates and two
//! polarizing beam splitters; which detector fires decides which machine
//! each player selects (horizontal → Machine A, vertical → Machine B).
//! Two pair sources are modelled:
//!
//! * a **correlated** (polarization-orthogonal product) pair, whose joint
//!   outcome distribution factorises into the two players' marginals and can
//!   be steered to any deterministic joint choice by the wave-plate angles;
//! * an **entangled singlet** pair, whose distribution depends only on the
//!   wave-plate angle difference and yields perfectly anti-correlated
//!   choices when the plates share one angle.
//!
//! Only the transforms actually used by the decision strategies are here;
//! this is not a general optics engine.

use crate::rng::RngStream;

/// Polarization or wave-plate angle in radians.
///
/// Finite by construction. All downstream formulas are π-periodic in the
/// wave-plate angles, so no range reduction is performed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(f64);

impl Angle {
    pub fn radians(value: f64) -> Self {
        assert!(value.is_finite(), "angle must be finite, got {value}");
        Self(value)
    }

    pub fn degrees(value: f64) -> Self {
        Self::radians(value.to_radians())
    }

    #[inline]
    pub fn as_radians(self) -> f64 {
        self.0
    }
}

/// The two half-wave-plate angles, one per player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    pub theta_hw1: Angle,
    pub theta_hw2: Angle,
}

impl WaveplateSetting {
    pub fn new(theta_hw1: Angle, theta_hw2: Angle) -> Self {
        Self {
            theta_hw1,
            theta_hw2,
        }
    }
}

/// Which photon-pair source feeds the players.
///
/// A correlated source emits a polarization-orthogonal pair: the signal
/// photon at `theta1`, the idler at `theta1 + π/2`. The entangled singlet
/// source carries no parameter; its outcome distribution depends only on
/// the wave-plate angle difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceMode {
    Correlated { theta1: Angle },
    EntangledSinglet,
}

/// A slot machine choice. Horizontal detection maps to `A`, vertical to `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineChoice {
    A,
    B,
}

impl MachineChoice {
    pub fn other(self) -> Self {
        match self {
            MachineChoice::A => MachineChoice::B,
            MachineChoice::B => MachineChoice::A,
        }
    }
}

impl std::fmt::Display for MachineChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MachineChoice::A => write!(f, "A"),
            MachineChoice::B => write!(f, "B"),
        }
    }
}

/// Probabilities of the four joint decisions, ordered (A,A), (A,B), (B,A), (B,B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointChoiceDistribution {
    pub p_aa: f64,
    pub p_ab: f64,
    pub p_ba: f64,
    pub p_bb: f64,
}

const PROB_TOL: f64 = 1e-12;

impl JointChoiceDistribution {
    pub fn new(p_aa: f64, p_ab: f64, p_ba: f64, p_bb: f64) -> Self {
        let dist = Self {
            p_aa,
            p_ab,
            p_ba,
            p_bb,
        };
        for p in dist.components() {
            assert!(
                (-PROB_TOL..=1.0 + PROB_TOL).contains(&p),
                "probability out of range: {p}"
            );
        }
        let sum: f64 = dist.components().iter().sum();
        assert!(
            (sum - 1.0).abs() <= PROB_TOL,
            "joint probabilities sum to {sum}, not 1"
        );
        dist
    }

    pub fn components(&self) -> [f64; 4] {
        [self.p_aa, self.p_ab, self.p_ba, self.p_bb]
    }

    /// Probability that both players pick the same machine.
    pub fn conflict_probability(&self) -> f64 {
        self.p_aa + self.p_bb
    }

    /// Draws one joint decision by inverse CDF over the fixed ordering
    /// (A,A), (A,B), (B,A), (B,B), consuming exactly one uniform draw.
    pub fn sample(&self, rng: &mut RngStream) -> (MachineChoice, MachineChoice) {
        use MachineChoice::{A, B};
        let u = rng.uniform01();
        let mut acc = self.p_aa;
        if u < acc {
            return (A, A);
        }
        acc += self.p_ab;
        if u < acc {
            return (A, B);
        }
        acc += self.p_ba;
        if u < acc {
            return (B, A);
        }
        (B, B)
    }
}

/// Half-wave plate at `theta_hw` maps a linear polarization `theta` to
/// `2·theta_hw − theta`.
#[inline]
pub fn half_waveplate_transform(theta_hw: Angle, theta: Angle) -> Angle {
    Angle::radians(2.0 * theta_hw.as_radians() - theta.as_radians())
}

/// Detection probabilities behind a polarizing beam splitter for a photon
/// polarized at `theta`: `(cos²θ, sin²θ)` for the horizontal and vertical
/// output ports.
#[inline]
pub fn pbs_probabilities(theta: Angle) -> (f64, f64) {
    // Evaluated as cos²θ = (1 + cos 2θ)/2: going through the doubled angle
    // keeps the outputs exactly 0 and 1 at multiples of π/2, so an
    // intentionally conflicted configuration samples degenerately instead
    // of leaking a ~1e-33 sliver of probability to the wrong outcome.
    let c2 = (2.0 * theta.as_radians()).cos();
    (0.5 * (1.0 + c2), 0.5 * (1.0 - c2))
}

/// Joint decision distribution for a correlated (product-state) pair.
///
/// The signal photon enters at `theta1`, the idler at `theta1 + π/2`; each
/// passes its own half-wave plate and beam splitter, so the joint
/// distribution is the outer product of the two marginals.
pub fn correlated_joint_distribution(
    theta1: Angle,
    wp: WaveplateSetting,
) -> JointChoiceDistribution {
    let theta2 = Angle::radians(theta1.as_radians() + std::f64::consts::FRAC_PI_2);
    let (p1_h, p1_v) = pbs_probabilities(half_waveplate_transform(wp.theta_hw1, theta1));
    let (p2_h, p2_v) = pbs_probabilities(half_waveplate_transform(wp.theta_hw2, theta2));
    JointChoiceDistribution::new(p1_h * p2_h, p1_h * p2_v, p1_v * p2_h, p1_v * p2_v)
}

/// Joint decision distribution for the entangled singlet pair.
///
/// Conflicts carry probability `½·sin²[2(θ_HW1 − θ_HW2)]` each, the two
/// non-conflict outcomes `½·cos²[2(θ_HW1 − θ_HW2)]` each; only the angle
/// difference matters.
pub fn entangled_joint_distribution(wp: WaveplateSetting) -> JointChoiceDistribution {
    let delta = wp.theta_hw1.as_radians() - wp.theta_hw2.as_radians();
    let (s, c) = (2.0 * delta).sin_cos();
    let conflict = 0.5 * s * s;
    let align = 0.5 * c * c;
    JointChoiceDistribution::new(conflict, align, align, conflict)
}

/// Dispatches to the distribution for the given source mode.
pub fn joint_distribution(mode: SourceMode, wp: WaveplateSetting) -> JointChoiceDistribution {
    match mode {
        SourceMode::Correlated { theta1 } => correlated_joint_distribution(theta1, wp),
        SourceMode::EntangledSinglet => entangled_joint_distribution(wp),
    }
}

/// Source and wave-plate configuration that forces both players onto
/// machine `m` (intentional conflict, used for checking and exploiting).
///
/// With a horizontally polarized signal photon, a plate at 0 leaves the
/// signal on the horizontal port while a plate at π/4 rotates the vertical
/// idler onto it as well; swapping the two plate angles steers both photons
/// to the vertical port instead. A half-wave plate rotates polarization by
/// twice its own angle, so π/4 here is the quarter-turn plate setting.
pub fn waveplates_for_exploit(m: MachineChoice) -> (SourceMode, WaveplateSetting) {
    let mode = SourceMode::Correlated {
        theta1: Angle::radians(0.0),
    };
    let wp = match m {
        MachineChoice::A => WaveplateSetting::new(
            Angle::radians(0.0),
            Angle::radians(std::f64::consts::FRAC_PI_4),
        ),
        MachineChoice::B => WaveplateSetting::new(
            Angle::radians(std::f64::consts::FRAC_PI_4),
            Angle::radians(0.0),
        ),
    };
    (mode, wp)
}

/// Entangled configuration with equal wave-plate angles: zero conflict
/// probability, each machine played by exactly one player every step.
pub fn waveplates_for_explore() -> (SourceMode, WaveplateSetting) {
    (
        SourceMode::EntangledSinglet,
        WaveplateSetting::new(Angle::radians(0.0), Angle::radians(0.0)),
    )
}
