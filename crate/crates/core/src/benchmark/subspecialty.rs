use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The thirteen neurology subspecialties used to stratify results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subspecialty {
    BehavioralCognitive,
    CsfCirculation,
    Epilepsy,
    Genetic,
    HeadacheDizziness,
    Infectious,
    Miscellaneous,
    MovementDisorders,
    NeuroOncology,
    Neuroimmunology,
    Neuromuscular,
    Neurophthalmology,
    Vascular,
}

impl Subspecialty {
    pub const ALL: [Subspecialty; 13] = [
        Subspecialty::BehavioralCognitive,
        Subspecialty::CsfCirculation,
        Subspecialty::Epilepsy,
        Subspecialty::Genetic,
        Subspecialty::HeadacheDizziness,
        Subspecialty::Infectious,
        Subspecialty::Miscellaneous,
        Subspecialty::MovementDisorders,
        Subspecialty::NeuroOncology,
        Subspecialty::Neuroimmunology,
        Subspecialty::Neuromuscular,
        Subspecialty::Neurophthalmology,
        Subspecialty::Vascular,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Subspecialty::BehavioralCognitive => "Behavioral & Cognitive Neurology",
            Subspecialty::CsfCirculation => "CSF Circulation Disorders",
            Subspecialty::Epilepsy => "Epilepsy",
            Subspecialty::Genetic => "Genetic Neurology",
            Subspecialty::HeadacheDizziness => "Headache and Dizziness",
            Subspecialty::Infectious => "Infectious Neurology",
            Subspecialty::Miscellaneous => "Miscellaneous",
            Subspecialty::MovementDisorders => "Movement Disorders",
            Subspecialty::NeuroOncology => "Neuro-oncology",
            Subspecialty::Neuroimmunology => "Neuroimmunology",
            Subspecialty::Neuromuscular => "Neuromuscular",
            Subspecialty::Neurophthalmology => "Neurophthalmology",
            Subspecialty::Vascular => "Vascular Neurology",
        }
    }
}

fn normalize(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown subspecialty label {0:?}")]
pub struct UnknownSubspecialty(pub String);

impl FromStr for Subspecialty {
    type Err = UnknownSubspecialty;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = normalize(s);
        Subspecialty::ALL
            .into_iter()
            .find(|sub| normalize(sub.label()) == wanted)
            .ok_or_else(|| UnknownSubspecialty(s.to_string()))
    }
}

impl fmt::Display for Subspecialty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Subspecialty {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Subspecialty {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
