//! Instruction-set models: classes, families, parametric times and binding.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numeric::{log2_biguint, rational_to_f64};
use crate::rational::{format_rational, is_non_negative, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("instruction set has no members")]
    Empty,
    #[error("invalid name {0:?}: names must be non-empty and contain no whitespace or '@'")]
    InvalidName(String),
    #[error("duplicate member name {0:?}")]
    DuplicateMember(String),
    #[error("duplicate parameter declaration {0:?}")]
    DuplicateParameter(String),
    #[error("member {0:?} must have a positive count")]
    ZeroCount(String),
    #[error("family {0:?} must have a positive step")]
    NonPositiveStep(String),
    #[error("family {0:?} must have at least one term")]
    ZeroTerms(String),
    #[error("member {0:?} has a negative time component")]
    NegativeTime(String),
    #[error("member {member:?} references undeclared parameter {parameter:?}")]
    UndeclaredParameter { member: String, parameter: String },
    #[error("missing value for parameter {0:?}")]
    MissingParameter(String),
    #[error("undeclared parameter {0:?}")]
    ExtraneousParameter(String),
    #[error("parameter {0:?} must be non-negative")]
    NegativeParameter(String),
    #[error("member {member:?} has non-positive execution time {time}")]
    NonPositiveTime { member: String, time: String },
}

impl ModelError {
    /// True for errors caused by the parameter binding rather than the model.
    pub fn is_binding_error(&self) -> bool {
        matches!(
            self,
            ModelError::MissingParameter(_)
                | ModelError::ExtraneousParameter(_)
                | ModelError::NegativeParameter(_)
        )
    }
}

pub(crate) fn check_name(name: &str) -> Result<(), ModelError> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '@') {
        return Err(ModelError::InvalidName(name.to_string()));
    }
    Ok(())
}

/// Affine execution time `base + Σ coeff·param`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeExpression {
    base: Rational,
    coeffs: BTreeMap<String, Rational>,
}

impl TimeExpression {
    pub fn constant(base: Rational) -> Self {
        Self { base, coeffs: BTreeMap::new() }
    }

    pub fn with_coeff(mut self, parameter: impl Into<String>, coeff: Rational) -> Self {
        self.coeffs.insert(parameter.into(), coeff);
        self
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Rational> {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn evaluate(&self, binding: &ParameterBinding) -> Result<Rational, ModelError> {
        let mut t = self.base.clone();
        for (name, coeff) in &self.coeffs {
            let v = binding
                .get(name)
                .ok_or_else(|| ModelError::MissingParameter(name.clone()))?;
            t += coeff * v;
        }
        Ok(t)
    }

    pub(crate) fn validate(
        &self,
        member: &str,
        declared: &BTreeSet<&str>,
    ) -> Result<(), ModelError> {
        if !is_non_negative(&self.base) || self.coeffs.values().any(|c| c.is_negative()) {
            return Err(ModelError::NegativeTime(member.to_string()));
        }
        for name in self.coeffs.keys() {
            if !declared.contains(name.as_str()) {
                return Err(ModelError::UndeclaredParameter {
                    member: member.to_string(),
                    parameter: name.clone(),
                });
            }
        }
        Ok(())
    }
}

impl From<Rational> for TimeExpression {
    fn from(base: Rational) -> Self {
        Self::constant(base)
    }
}

/// `count` distinct instructions sharing one execution time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionClass {
    pub name: String,
    pub count: BigUint,
    pub time: TimeExpression,
}

/// Instructions with times `time_base + F·step`, `F = 0 … num_terms−1`,
/// `count_per_term` of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionFamily {
    pub name: String,
    pub count_per_term: BigUint,
    pub time_base: TimeExpression,
    pub step: Rational,
    pub num_terms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Member {
    Class(InstructionClass),
    Family(InstructionFamily),
}

impl Member {
    pub fn name(&self) -> &str {
        match self {
            Member::Class(c) => &c.name,
            Member::Family(f) => &f.name,
        }
    }

    /// Number of individual instructions this member stands for.
    pub fn instruction_count(&self) -> BigUint {
        match self {
            Member::Class(c) => c.count.clone(),
            Member::Family(f) => &f.count_per_term * BigUint::from(f.num_terms),
        }
    }

    fn validate(&self, declared: &BTreeSet<&str>) -> Result<(), ModelError> {
        check_name(self.name())?;
        match self {
            Member::Class(c) => {
                if c.count.is_zero() {
                    return Err(ModelError::ZeroCount(c.name.clone()));
                }
                c.time.validate(&c.name, declared)
            }
            Member::Family(f) => {
                if f.count_per_term.is_zero() {
                    return Err(ModelError::ZeroCount(f.name.clone()));
                }
                if !f.step.is_positive() {
                    return Err(ModelError::NonPositiveStep(f.name.clone()));
                }
                if f.num_terms == 0 {
                    return Err(ModelError::ZeroTerms(f.name.clone()));
                }
                f.time_base.validate(&f.name, declared)
            }
        }
    }
}

/// Values for the free parameters of an [`InstructionSet`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParameterBinding {
    values: BTreeMap<String, Rational>,
}

impl ParameterBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Rational) -> Self {
        self.values.insert(name.into(), value);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Rational) -> Option<Rational> {
        self.values.insert(name.into(), value)
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.values.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.values.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keeps only the named parameters.
    pub fn restricted_to<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut out = Self::new();
        for name in names {
            if let Some(v) = self.values.get(name) {
                out.values.insert(name.to_string(), v.clone());
            }
        }
        out
    }

    /// Checks that exactly the declared names are bound, to non-negative values.
    pub fn check_against(&self, declared: &[String]) -> Result<(), ModelError> {
        for name in declared {
            if !self.values.contains_key(name) {
                return Err(ModelError::MissingParameter(name.clone()));
            }
        }
        for (name, value) in &self.values {
            if !declared.iter().any(|d| d == name) {
                return Err(ModelError::ExtraneousParameter(name.clone()));
            }
            if value.is_negative() {
                return Err(ModelError::NegativeParameter(name.clone()));
            }
        }
        Ok(())
    }
}

/// A validated, possibly parametric instruction-set model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionSet {
    name: String,
    parameters: Vec<String>,
    members: Vec<Member>,
}

impl InstructionSet {
    pub fn new(
        name: impl Into<String>,
        parameters: Vec<String>,
        members: Vec<Member>,
    ) -> Result<Self, ModelError> {
        let mut declared = BTreeSet::new();
        for p in &parameters {
            check_name(p)?;
            if !declared.insert(p.as_str()) {
                return Err(ModelError::DuplicateParameter(p.clone()));
            }
        }
        if members.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen = BTreeSet::new();
        for m in &members {
            m.validate(&declared)?;
            if !seen.insert(m.name()) {
                return Err(ModelError::DuplicateMember(m.name().to_string()));
            }
        }
        Ok(Self { name: name.into(), parameters, members })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn total_count(&self) -> BigUint {
        self.members.iter().map(Member::instruction_count).sum()
    }

    /// Evaluates every time expression under `binding`.
    pub fn bind(&self, binding: &ParameterBinding) -> Result<BoundInstructionSet, ModelError> {
        binding.check_against(&self.parameters)?;
        let members = self
            .members
            .iter()
            .map(|m| match m {
                Member::Class(c) => {
                    Ok(BoundMember::class(c.name.clone(), c.count.clone(), c.time.evaluate(binding)?))
                }
                Member::Family(f) => Ok(BoundMember::family(
                    f.name.clone(),
                    f.count_per_term.clone(),
                    f.time_base.evaluate(binding)?,
                    f.step.clone(),
                    f.num_terms,
                )),
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        BoundInstructionSet::new(self.name.clone(), members)
    }
}

impl From<&BoundInstructionSet> for InstructionSet {
    fn from(set: &BoundInstructionSet) -> Self {
        let members = set
            .members
            .iter()
            .map(|m| match &m.progression {
                None => Member::Class(InstructionClass {
                    name: m.name.clone(),
                    count: m.count.clone(),
                    time: TimeExpression::constant(m.time.clone()),
                }),
                Some(p) => Member::Family(InstructionFamily {
                    name: m.name.clone(),
                    count_per_term: m.count.clone(),
                    time_base: TimeExpression::constant(m.time.clone()),
                    step: p.step.clone(),
                    num_terms: p.terms,
                }),
            })
            .collect();
        Self { name: set.name.clone(), parameters: Vec::new(), members }
    }
}

/// Arithmetic progression of times for a family member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Progression {
    pub step: Rational,
    pub terms: u64,
}

/// A member with concrete times. `count` is per term for families.
#[derive(Debug, Clone)]
pub struct BoundMember {
    name: String,
    count: BigUint,
    time: Rational,
    progression: Option<Progression>,
    pub(crate) log2_count: f64,
    pub(crate) time_f64: f64,
    pub(crate) step_f64: f64,
    pub(crate) terms_f64: f64,
}

impl PartialEq for BoundMember {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.count == other.count
            && self.time == other.time
            && self.progression == other.progression
    }
}

impl BoundMember {
    pub fn class(name: impl Into<String>, count: impl Into<BigUint>, time: Rational) -> Self {
        let count = count.into();
        Self {
            log2_count: log2_biguint(&count),
            time_f64: rational_to_f64(&time),
            step_f64: 0.0,
            terms_f64: 1.0,
            name: name.into(),
            count,
            time,
            progression: None,
        }
    }

    pub fn family(
        name: impl Into<String>,
        count_per_term: impl Into<BigUint>,
        time_base: Rational,
        step: Rational,
        terms: u64,
    ) -> Self {
        let mut m = Self::class(name, count_per_term, time_base);
        m.step_f64 = rational_to_f64(&step);
        m.terms_f64 = terms as f64;
        m.progression = Some(Progression { step, terms });
        m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Instructions per distinct time (the whole class for plain classes).
    pub fn count(&self) -> &BigUint {
        &self.count
    }

    /// Execution time of a class, or of the first term of a family.
    pub fn time(&self) -> &Rational {
        &self.time
    }

    pub fn progression(&self) -> Option<&Progression> {
        self.progression.as_ref()
    }

    pub fn is_family(&self) -> bool {
        self.progression.is_some()
    }

    pub fn num_terms(&self) -> u64 {
        self.progression.as_ref().map_or(1, |p| p.terms)
    }

    pub fn instruction_count(&self) -> BigUint {
        &self.count * BigUint::from(self.num_terms())
    }

    /// Time of term `index` (0 for a plain class).
    pub fn term_time(&self, index: u64) -> Rational {
        match &self.progression {
            None => self.time.clone(),
            Some(p) => &self.time + &p.step * Rational::from_integer(index.into()),
        }
    }

    /// Index of the term whose time equals `time`, if any.
    pub fn term_index(&self, time: &Rational) -> Option<u64> {
        match &self.progression {
            None => (time == &self.time).then_some(0),
            Some(p) => {
                let k = (time - &self.time) / &p.step;
                if !k.is_integer() || k.is_negative() {
                    return None;
                }
                k.to_integer().to_u64().filter(|k| *k < p.terms)
            }
        }
    }

    /// Replaces a one-term family by the equivalent plain class.
    pub fn flattened(&self) -> Self {
        match &self.progression {
            Some(p) if p.terms == 1 => {
                BoundMember::class(self.name.clone(), self.count.clone(), self.time.clone())
            }
            _ => self.clone(),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        check_name(&self.name)?;
        if self.count.is_zero() {
            return Err(ModelError::ZeroCount(self.name.clone()));
        }
        if !self.time.is_positive() {
            return Err(ModelError::NonPositiveTime {
                member: self.name.clone(),
                time: format_rational(&self.time),
            });
        }
        if let Some(p) = &self.progression {
            if !p.step.is_positive() {
                return Err(ModelError::NonPositiveStep(self.name.clone()));
            }
            if p.terms == 0 {
                return Err(ModelError::ZeroTerms(self.name.clone()));
            }
        }
        Ok(())
    }
}

/// An instruction set with every time evaluated to a positive rational.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInstructionSet {
    name: String,
    members: Vec<BoundMember>,
}

impl BoundInstructionSet {
    pub fn new(name: impl Into<String>, members: Vec<BoundMember>) -> Result<Self, ModelError> {
        if members.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen = BTreeSet::new();
        for m in &members {
            m.validate()?;
            if !seen.insert(m.name.as_str()) {
                return Err(ModelError::DuplicateMember(m.name.clone()));
            }
        }
        Ok(Self { name: name.into(), members })
    }

    /// Shorthand for sets of plain classes given as `(count, integer time)`.
    pub fn from_classes(classes: &[(u64, u64)]) -> Result<Self, ModelError> {
        let members = classes
            .iter()
            .enumerate()
            .map(|(i, &(count, time))| {
                BoundMember::class(alloc::format!("c{i}"), count, Rational::from_integer(time.into()))
            })
            .collect();
        Self::new("classes", members)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[BoundMember] {
        &self.members
    }

    pub fn member(&self, name: &str) -> Option<&BoundMember> {
        self.members.iter().find(|m| m.name == name)
    }

    /// Σ class counts + Σ family count_per_term·num_terms, exactly.
    pub fn total_count(&self) -> BigUint {
        self.members.iter().map(BoundMember::instruction_count).sum()
    }

    /// The same set with every one-term family written as a plain class.
    pub fn flattened(&self) -> Self {
        Self {
            name: self.name.clone(),
            members: self.members.iter().map(BoundMember::flattened).collect(),
        }
    }

    /// Adds members; fails on a name clash.
    pub fn extended(&self, extra: impl IntoIterator<Item = BoundMember>) -> Result<Self, ModelError> {
        let mut members = self.members.clone();
        members.extend(extra);
        Self::new(self.name.clone(), members)
    }

    /// Least common multiple of all time denominators: the factor that
    /// would make every time an integer.
    pub fn time_denominator_lcm(&self) -> BigUint {
        use num_integer::Integer;
        let mut l = num_bigint::BigInt::one();
        for m in &self.members {
            l = l.lcm(m.time.denom());
            if let Some(p) = &m.progression {
                l = l.lcm(p.step.denom());
            }
        }
        l.magnitude().clone()
    }
}
