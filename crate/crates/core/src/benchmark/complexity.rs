use serde::{Deserialize, Serialize};

/// A complexity grade on one dimension, L1 through L3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Level(u8);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("complexity level must be 1, 2 or 3 (got {0})")]
pub struct InvalidLevel(pub i64);

impl Level {
    pub const L1: Level = Level(1);
    pub const L2: Level = Level(2);
    pub const L3: Level = Level(3);

    pub fn new(value: u8) -> Result<Self, InvalidLevel> {
        match value {
            1..=3 => Ok(Level(value)),
            other => Err(InvalidLevel(other.into())),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Level {
    type Error = InvalidLevel;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Level::new(value)
    }
}

impl From<Level> for u8 {
    fn from(level: Level) -> u8 {
        level.0
    }
}

/// Which of the three complexity axes a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    /// Factual knowledge depth.
    Fkd,
    /// Clinical concept integration.
    Cci,
    /// Reasoning complexity.
    Rc,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Fkd, Dimension::Cci, Dimension::Rc];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Fkd => "fkd",
            Dimension::Cci => "cci",
            Dimension::Rc => "rc",
        }
    }
}

/// Expert-assigned grades on the three complexity dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub fkd: Level,
    pub cci: Level,
    pub rc: Level,
}

impl ComplexityProfile {
    pub fn new(fkd: Level, cci: Level, rc: Level) -> Self {
        Self { fkd, cci, rc }
    }

    pub fn level(&self, dim: Dimension) -> Level {
        match dim {
            Dimension::Fkd => self.fkd,
            Dimension::Cci => self.cci,
            Dimension::Rc => self.rc,
        }
    }

    /// Sum of the three levels, always in `3..=9`.
    pub fn composite_score(&self) -> u8 {
        self.fkd.0 + self.cci.0 + self.rc.0
    }
}

pub fn composite_score(profile: &ComplexityProfile) -> u8 {
    profile.composite_score()
}
