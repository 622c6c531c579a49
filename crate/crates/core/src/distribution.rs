//! Instruction distributions, the capacity-achieving one in particular, and
//! efficiency `h / Σ P(x)·τ(x)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::BoundInstructionSet;
use crate::solver::{member_log2_weight, member_mean_time, CapacityResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("distribution references unknown member {0:?}")]
    UnknownMember(String),
    #[error("invalid probability mass {mass} for member {member:?}")]
    InvalidMass { member: String, mass: f64 },
    #[error("entropy must be non-negative, got {0}")]
    NegativeEntropy(f64),
}

/// Probability mass assigned to one member of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberMass {
    pub name: String,
    /// Total mass over all instructions of the member.
    pub mass: f64,
    /// Mass-weighted mean execution time within the member.
    pub mean_time: f64,
    /// `log₂` probability of one instruction at the member's first time.
    pub log2_instruction_probability: f64,
    /// Change in `log₂` per-instruction probability per family term
    /// (zero for plain classes and uniform assignments).
    pub log2_term_ratio: f64,
    /// Mean family term index under this assignment (zero for classes).
    pub mean_term_index: f64,
}

impl MemberMass {
    /// Probability of one individual instruction of family term `index`.
    pub fn instruction_probability(&self, index: u64) -> f64 {
        libm::exp2(self.log2_instruction_probability + self.log2_term_ratio * index as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstructionDistribution {
    pub members: Vec<MemberMass>,
}

impl InstructionDistribution {
    pub fn total_mass(&self) -> f64 {
        self.members.iter().map(|m| m.mass).sum()
    }

    pub fn get(&self, name: &str) -> Option<&MemberMass> {
        self.members.iter().find(|m| m.name == name)
    }

    /// `Σ P(x)·τ(x)`.
    pub fn mean_time(&self) -> f64 {
        self.members.iter().map(|m| m.mass * m.mean_time).sum()
    }

    /// Entropy in bits of one draw of an individual instruction,
    /// `−Σ_x p(x) log₂ p(x)`.
    pub fn instruction_entropy(&self) -> f64 {
        self.members
            .iter()
            .filter(|m| m.mass > 0.0)
            .map(|m| {
                -m.mass * (m.log2_instruction_probability + m.log2_term_ratio * m.mean_term_index)
            })
            .sum()
    }

    /// Masses spread uniformly over the individual instructions of each
    /// member.
    pub fn uniform_within_members(
        set: &BoundInstructionSet,
        masses: &[(&str, f64)],
    ) -> Result<Self, DistributionError> {
        let mut members = Vec::with_capacity(masses.len());
        for &(name, mass) in masses {
            let m = set
                .member(name)
                .ok_or_else(|| DistributionError::UnknownMember(name.to_string()))?;
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(DistributionError::InvalidMass { member: name.to_string(), mass });
            }
            let terms = m.terms_f64;
            let mean_index = (terms - 1.0) / 2.0;
            members.push(MemberMass {
                name: name.to_string(),
                mass,
                mean_time: m.time_f64 + m.step_f64 * mean_index,
                log2_instruction_probability: libm::log2(mass) - m.log2_count - libm::log2(terms),
                log2_term_ratio: 0.0,
                mean_term_index: mean_index,
            });
        }
        Ok(Self { members })
    }
}

/// `p*(x) = 2^(−τ(x)·C)`: each member's mass and per-instruction rule at the
/// solved capacity.
pub fn optimal_distribution(set: &BoundInstructionSet, cap: &CapacityResult) -> InstructionDistribution {
    let y = cap.capacity_bits;
    let members = set
        .members()
        .iter()
        .map(|m| {
            let (log2_mass, _) = member_log2_weight(m, y);
            let mean_time = member_mean_time(m, y);
            let mean_term_index = if m.is_family() { (mean_time - m.time_f64) / m.step_f64 } else { 0.0 };
            MemberMass {
                name: m.name().to_string(),
                mass: libm::exp2(log2_mass),
                mean_time,
                log2_instruction_probability: -m.time_f64 * y,
                log2_term_ratio: -m.step_f64 * y,
                mean_term_index,
            }
        })
        .collect();
    InstructionDistribution { members }
}

/// `entropy_bits / Σ P(x)·τ(x)`, in bits per time unit.
pub fn efficiency(
    set: &BoundInstructionSet,
    dist: &InstructionDistribution,
    entropy_bits: f64,
) -> Result<f64, DistributionError> {
    if entropy_bits < 0.0 {
        return Err(DistributionError::NegativeEntropy(entropy_bits));
    }
    for m in &dist.members {
        if set.member(&m.name).is_none() {
            return Err(DistributionError::UnknownMember(m.name.clone()));
        }
    }
    Ok(entropy_bits / dist.mean_time())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundMember;
    use crate::rational::Rational;
    use crate::solver::{solve_capacity, DEFAULT_TOLERANCE};
    use alloc::vec;
    use num_bigint::BigInt;

    fn toy() -> BoundInstructionSet {
        BoundInstructionSet::from_classes(&[(2, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn symmetric_pair() {
        let set = BoundInstructionSet::from_classes(&[(2, 1)]).unwrap();
        let cap = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        let d = optimal_distribution(&set, &cap);
        assert!((d.members[0].instruction_probability(0) - 0.5).abs() < 1e-12);
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toy_probabilities() {
        let set = toy();
        let cap = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        let d = optimal_distribution(&set, &cap);
        let q = libm::sqrt(2.0) - 1.0;
        assert!((d.members[0].instruction_probability(0) - q).abs() < 1e-12);
        assert!((d.members[1].instruction_probability(0) - q * q).abs() < 1e-12);
        assert!((d.members[0].mass - 2.0 * q).abs() < 1e-12);
        assert!((d.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_instruction_gets_everything() {
        let set = BoundInstructionSet::from_classes(&[(1, 3)]).unwrap();
        let cap = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        let d = optimal_distribution(&set, &cap);
        assert_eq!(d.members[0].instruction_probability(0), 1.0);
        assert_eq!(d.total_mass(), 1.0);
    }

    #[test]
    fn family_mass_matches_term_sum() {
        let int = |n: i64| Rational::from_integer(BigInt::from(n));
        let set = BoundInstructionSet::new(
            "f",
            vec![BoundMember::class("a", 3u32, int(1)), BoundMember::family("f", 2u32, int(1), int(2), 6)],
        )
        .unwrap();
        let cap = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        let d = optimal_distribution(&set, &cap);
        let fam = d.get("f").unwrap();
        let mut mass = 0.0;
        let mut time = 0.0;
        for k in 0..6u64 {
            let p = 2.0 * fam.instruction_probability(k);
            mass += p;
            time += p * (1.0 + 2.0 * k as f64);
        }
        assert!((fam.mass - mass).abs() < 1e-12);
        assert!((fam.mean_time - time / mass).abs() < 1e-10);
        assert!((d.total_mass() - 1.0).abs() < 1e-10);
        let eff = efficiency(&set, &d, d.instruction_entropy()).unwrap();
        assert!((eff - cap.capacity_bits).abs() < 1e-9);
    }

    #[test]
    fn uniform_pair_efficiency() {
        let set = BoundInstructionSet::from_classes(&[(2, 1)]).unwrap();
        let d = InstructionDistribution::uniform_within_members(&set, &[("c0", 1.0)]).unwrap();
        assert_eq!(efficiency(&set, &d, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn optimal_efficiency_equals_capacity() {
        let set = toy();
        let cap = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        let d = optimal_distribution(&set, &cap);
        let eff = efficiency(&set, &d, d.instruction_entropy()).unwrap();
        assert!((eff - 1.271_553_3).abs() < 1e-7);
    }

    #[test]
    fn uniform_thirds_efficiency() {
        // log₂3 / (4/3)
        let set = toy();
        let d = InstructionDistribution::uniform_within_members(&set, &[("c0", 2.0 / 3.0), ("c1", 1.0 / 3.0)])
            .unwrap();
        let h = d.instruction_entropy();
        assert!((h - libm::log2(3.0)).abs() < 1e-12);
        let eff = efficiency(&set, &d, h).unwrap();
        assert!((eff - 0.75 * libm::log2(3.0)).abs() < 1e-12);
        assert!((eff - 1.18872).abs() < 1e-5);
    }

    #[test]
    fn unknown_member() {
        let set = toy();
        let d = InstructionDistribution {
            members: vec![MemberMass {
                name: "zz".into(),
                mass: 1.0,
                mean_time: 1.0,
                log2_instruction_probability: 0.0,
                log2_term_ratio: 0.0,
                mean_term_index: 0.0,
            }],
        };
        assert_eq!(efficiency(&set, &d, 0.0), Err(DistributionError::UnknownMember("zz".into())));
        assert!(InstructionDistribution::uniform_within_members(&set, &[("zz", 1.0)]).is_err());
    }
}
