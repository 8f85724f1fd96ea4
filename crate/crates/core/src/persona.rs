//! The eleven persona conditions: a no-persona baseline plus a high and a
//! low setting for each Big Five trait.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Big Five dimension, ordered alphabetically by code letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trait {
    Agreeableness,
    Conscientiousness,
    Extraversion,
    Neuroticism,
    Openness,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Agreeableness,
        Trait::Conscientiousness,
        Trait::Extraversion,
        Trait::Neuroticism,
        Trait::Openness,
    ];

    pub fn letter(self) -> &'static str {
        match self {
            Trait::Agreeableness => "A",
            Trait::Conscientiousness => "C",
            Trait::Extraversion => "E",
            Trait::Neuroticism => "N",
            Trait::Openness => "O",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Trait::Agreeableness => "Agreeableness",
            Trait::Conscientiousness => "Conscientiousness",
            Trait::Extraversion => "Extraversion",
            Trait::Neuroticism => "Neuroticism",
            Trait::Openness => "Openness",
        }
    }

    pub fn high(self) -> PersonaCondition {
        PersonaCondition::Polar(self, Polarity::High)
    }

    pub fn low(self) -> PersonaCondition {
        PersonaCondition::Polar(self, Polarity::Low)
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

impl FromStr for Trait {
    type Err = Error;

    /// Accepts the code letter or the full name.
    fn from_str(s: &str) -> Result<Self, Error> {
        Trait::ALL
            .into_iter()
            .find(|t| t.letter() == s || t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown trait {s:?}")))
    }
}

impl Serialize for Trait {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.letter())
    }
}

impl<'de> Deserialize<'de> for Trait {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    High,
    Low,
}

impl Polarity {
    pub fn letter(self) -> &'static str {
        match self {
            Polarity::High => "H",
            Polarity::Low => "L",
        }
    }

    /// +1 for high, -1 for low.
    pub fn sign(self) -> i8 {
        match self {
            Polarity::High => 1,
            Polarity::Low => -1,
        }
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "H" | "high" => Ok(Polarity::High),
            "L" | "low" => Ok(Polarity::Low),
            _ => Err(Error::InvalidArgument(format!("unknown polarity {s:?}"))),
        }
    }
}

/// `BASE` or one of the ten `<trait>_<polarity>` codes. The derived order is
/// the canonical report order: BASE, A_H, A_L, C_H, ..., O_L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PersonaCondition {
    Baseline,
    Polar(Trait, Polarity),
}

impl PersonaCondition {
    pub const ALL: [PersonaCondition; 11] = {
        use Polarity::*;
        use Trait::*;
        [
            PersonaCondition::Baseline,
            PersonaCondition::Polar(Agreeableness, High),
            PersonaCondition::Polar(Agreeableness, Low),
            PersonaCondition::Polar(Conscientiousness, High),
            PersonaCondition::Polar(Conscientiousness, Low),
            PersonaCondition::Polar(Extraversion, High),
            PersonaCondition::Polar(Extraversion, Low),
            PersonaCondition::Polar(Neuroticism, High),
            PersonaCondition::Polar(Neuroticism, Low),
            PersonaCondition::Polar(Openness, High),
            PersonaCondition::Polar(Openness, Low),
        ]
    };

    /// The ten trait-polarity conditions, without the baseline.
    pub fn polar() -> impl Iterator<Item = PersonaCondition> {
        Self::ALL[1..].iter().copied()
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, PersonaCondition::Baseline)
    }

    pub fn code(self) -> &'static str {
        const CODES: [&str; 11] = [
            "BASE", "A_H", "A_L", "C_H", "C_L", "E_H", "E_L", "N_H", "N_L", "O_H", "O_L",
        ];
        CODES[self.ordinal()]
    }

    /// Position in [`PersonaCondition::ALL`].
    pub fn ordinal(self) -> usize {
        match self {
            PersonaCondition::Baseline => 0,
            PersonaCondition::Polar(t, p) => {
                1 + 2 * (t as usize) + if p == Polarity::High { 0 } else { 1 }
            }
        }
    }
}

impl fmt::Display for PersonaCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PersonaCondition {
    type Err = Error;

    /// Case-sensitive; only the eleven canonical codes are accepted.
    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|p| p.code() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown persona code {s:?}")))
    }
}

impl Serialize for PersonaCondition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for PersonaCondition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
